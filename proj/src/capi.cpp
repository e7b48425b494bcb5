#include "qkd3/qkd3.h"

#include <cstring>
#include <exception>
#include <string>

#include "adversary.hpp"
#include "analysis.hpp"
#include "gf2codes.hpp"
#include "protocol.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "verify.hpp"

using namespace qkd3;

namespace {

thread_local std::string g_last_error;

qkd3_status fail(qkd3_status st, const std::string& msg) {
    g_last_error = msg;
    return st;
}

// Exceptions never cross the C boundary; every entry point funnels through here.
template <typename Fn>
qkd3_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return fail(QKD3_ERR_INVALID_ARGUMENT, e.what());
    } catch (...) {
        return fail(QKD3_ERR_INVALID_ARGUMENT, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct qkd3_params {
    protocol::ProtocolParams value;
};
struct qkd3_strategy {
    adversary::EveStrategy value;
};
struct qkd3_matrix {
    gf2::PrivacyMatrix value;
};
struct qkd3_session {
    protocol::SessionRecord value;
};

extern "C" {

const char* qkd3_version(void) { return "1.0.0"; }

const char* qkd3_status_name(qkd3_status st) {
    switch (st) {
        case QKD3_OK: return "ok";
        case QKD3_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case QKD3_ERR_NOT_FOUND: return "not_found";
        case QKD3_ERR_CHECK_FAILED: return "check_failed";
        case QKD3_ERR_IO: return "io_error";
        case QKD3_ERR_UNAVAILABLE: return "unavailable";
    }
    return "unknown";
}

const char* qkd3_last_error(void) { return g_last_error.c_str(); }

void qkd3_string_free(char* s) { delete[] s; }

uint64_t qkd3_mix_seed(uint64_t seed, uint64_t index) {
    return mix_key(seed, static_cast<std::uint64_t>(RngPhase::Trial), index);
}

/* ------------------------------------------------------------------ */

qkd3_status qkd3_params_derive(uint32_t m, double eps, double tau, double tau_s,
                               qkd3_params** out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = new qkd3_params{protocol::derive_params(m, eps, tau, tau_s)};
        return QKD3_OK;
    });
}

void qkd3_params_free(qkd3_params* p) { delete p; }

uint32_t qkd3_params_m(const qkd3_params* p) { return static_cast<uint32_t>(p->value.m); }
uint32_t qkd3_params_r(const qkd3_params* p) { return static_cast<uint32_t>(p->value.r); }
uint32_t qkd3_params_s(const qkd3_params* p) { return static_cast<uint32_t>(p->value.s); }
uint32_t qkd3_params_n(const qkd3_params* p) { return static_cast<uint32_t>(p->value.n); }
double qkd3_params_eps(const qkd3_params* p) { return p->value.eps; }
double qkd3_params_tau(const qkd3_params* p) { return p->value.tau; }
double qkd3_params_tau_s(const qkd3_params* p) { return p->value.tau_s; }
double qkd3_params_d_k(const qkd3_params* p) { return p->value.d_k; }

/* ------------------------------------------------------------------ */

qkd3_status qkd3_strategy_parse(const char* spec, qkd3_strategy** out) {
    if (!spec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "spec/out must not be null");
    return guarded([&] {
        *out = new qkd3_strategy{adversary::EveStrategy::parse(spec)};
        return QKD3_OK;
    });
}

void qkd3_strategy_free(qkd3_strategy* s) { delete s; }

qkd3_status qkd3_strategy_expected_error_rate(const qkd3_strategy* s, double* out) {
    if (!s || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = adversary::expected_error_rate(s->value);
        return QKD3_OK;
    });
}

qkd3_status qkd3_strategy_per_basis_error_rates(const qkd3_strategy* s, double out[3]) {
    if (!s || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto rates = adversary::expected_error_rate_per_basis(s->value);
        for (int a = 0; a < 3; ++a) out[a] = rates[a];
        return QKD3_OK;
    });
}

/* ------------------------------------------------------------------ */

qkd3_status qkd3_matrix_find(uint32_t m, uint32_t r, double d_k, uint64_t max_tries, uint64_t seed,
                             qkd3_matrix** out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&]() -> qkd3_status {
        RngStream rng = make_stream(seed, RngPhase::MatrixSearch);
        gf2::MatrixSearchResult res = gf2::find_privacy_matrix(m, r, d_k, max_tries, rng);
        if (!res.matrix) {
            std::string msg = "no matrix found after " + std::to_string(res.tries) +
                              " tries; requested rate m/r = " +
                              serialize::format_double(res.requested_rate) +
                              ", asymptotic Shannon rate 1 - h(d_k/2r) = " +
                              serialize::format_double(res.shannon_rate);
            msg += res.requested_rate > res.shannon_rate ? " (parameters are infeasible)"
                                                         : " (retry with more tries or a new seed)";
            return fail(QKD3_ERR_NOT_FOUND, msg);
        }
        *out = new qkd3_matrix{std::move(*res.matrix)};
        return QKD3_OK;
    });
}

qkd3_status qkd3_matrix_generate(const qkd3_params* p, uint64_t max_tries, uint64_t seed,
                                 qkd3_matrix** out) {
    if (!p) return fail(QKD3_ERR_INVALID_ARGUMENT, "params must not be null");
    return qkd3_matrix_find(static_cast<uint32_t>(p->value.m), static_cast<uint32_t>(p->value.r),
                            p->value.d_k, max_tries, seed, out);
}

qkd3_status qkd3_matrix_load(const char* path, qkd3_matrix** out) {
    if (!path || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    try {
        *out = new qkd3_matrix{gf2::load_matrix(path)};
        return QKD3_OK;
    } catch (const std::runtime_error& e) {
        return fail(QKD3_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(QKD3_ERR_INVALID_ARGUMENT, e.what());
    }
}

qkd3_status qkd3_matrix_save(const qkd3_matrix* k, const char* path) {
    if (!k || !path) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    try {
        gf2::save_matrix(k->value, path);
        return QKD3_OK;
    } catch (const std::exception& e) {
        return fail(QKD3_ERR_IO, e.what());
    }
}

qkd3_status qkd3_matrix_to_text(const qkd3_matrix* k, char** out) {
    if (!k || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    *out = dup_string(gf2::matrix_to_text(k->value));
    return QKD3_OK;
}

uint32_t qkd3_matrix_rows(const qkd3_matrix* k) { return static_cast<uint32_t>(k->value.num_rows()); }
uint32_t qkd3_matrix_cols(const qkd3_matrix* k) { return static_cast<uint32_t>(k->value.num_cols()); }

qkd3_status qkd3_matrix_min_weight(const qkd3_matrix* k, uint32_t* out) {
    if (!k || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    if (!k->value.certified_min_weight) return fail(QKD3_ERR_UNAVAILABLE, "matrix is not certified");
    *out = static_cast<uint32_t>(*k->value.certified_min_weight);
    return QKD3_OK;
}

void qkd3_matrix_free(qkd3_matrix* k) { delete k; }

/* ------------------------------------------------------------------ */

qkd3_status qkd3_session_run(const qkd3_params* p, const qkd3_strategy* s, const qkd3_matrix* k,
                             uint64_t seed, qkd3_session** out) {
    if (!p || !s || !k || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out = new qkd3_session{protocol::run_session(p->value, s->value, k->value, seed)};
        return QKD3_OK;
    });
}

void qkd3_session_free(qkd3_session* rec) { delete rec; }

int qkd3_session_validation_passed(const qkd3_session* rec) {
    return rec->value.validation_passed ? 1 : 0;
}

int qkd3_session_sift_failed(const qkd3_session* rec) { return rec->value.sift_failed ? 1 : 0; }

qkd3_status qkd3_session_error_rate(const qkd3_session* rec, double* out) {
    if (!rec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    if (rec->value.sift_failed) return fail(QKD3_ERR_UNAVAILABLE, "sifting failed, no error rate");
    *out = rec->value.sifted_error_rate();
    return QKD3_OK;
}

qkd3_status qkd3_session_error_count(const qkd3_session* rec, uint64_t* out) {
    if (!rec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    if (rec->value.sift_failed) return fail(QKD3_ERR_UNAVAILABLE, "sifting failed, no error count");
    *out = rec->value.error_count;
    return QKD3_OK;
}

qkd3_status qkd3_session_net_gain_bits(const qkd3_session* rec, double* out) {
    if (!rec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    const auto gain = rec->value.net_gain_bits();
    if (!gain) return fail(QKD3_ERR_UNAVAILABLE, "validation failed, no net gain");
    *out = *gain;
    return QKD3_OK;
}

qkd3_status qkd3_session_keys_match(const qkd3_session* rec, int* out) {
    if (!rec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    if (!rec->value.validation_passed)
        return fail(QKD3_ERR_UNAVAILABLE, "validation failed, Bob holds no key");
    *out = rec->value.alice_key == rec->value.bob_key ? 1 : 0;
    return QKD3_OK;
}

qkd3_status qkd3_session_to_json(const qkd3_session* rec, char** out) {
    if (!rec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    *out = dup_string(serialize::session_to_json(rec->value));
    return QKD3_OK;
}

qkd3_status qkd3_session_csv_header(const char* extra_column, char** out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    *out = dup_string(serialize::session_csv_header(extra_column ? extra_column : ""));
    return QKD3_OK;
}

qkd3_status qkd3_session_csv_row(const qkd3_session* rec, uint64_t trial, const char* extra_value,
                                 char** out) {
    if (!rec || !out) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    *out = dup_string(serialize::session_csv_row(rec->value, trial, extra_value ? extra_value : ""));
    return QKD3_OK;
}

/* ------------------------------------------------------------------ */

qkd3_status qkd3_binary_entropy(double p, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = gf2::binary_entropy(p);
        return QKD3_OK;
    });
}

qkd3_status qkd3_shannon_rate_bound(double eps, double tau, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = gf2::shannon_rate_bound(eps, tau);
        return QKD3_OK;
    });
}

qkd3_status qkd3_theta(double r, double tau, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = analysis::theta(r, tau);
        return QKD3_OK;
    });
}

qkd3_status qkd3_entropy_lower_bound(double m, double r, double tau, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = analysis::entropy_lower_bound(m, r, tau);
        return QKD3_OK;
    });
}

qkd3_status qkd3_net_gain(int bases, double eps, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    if (bases != 2 && bases != 3) return fail(QKD3_ERR_INVALID_ARGUMENT, "bases must be 2 or 3");
    return guarded([&] {
        *out = bases == 3 ? analysis::net_gain_three_basis(eps) : analysis::net_gain_two_basis(eps);
        return QKD3_OK;
    });
}

qkd3_status qkd3_solve_threshold(int bases, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    if (bases != 2 && bases != 3) return fail(QKD3_ERR_INVALID_ARGUMENT, "bases must be 2 or 3");
    return guarded([&] {
        *out = analysis::solve_threshold(
            bases == 3 ? analysis::net_gain_three_basis : analysis::net_gain_two_basis, 1e-3, 0.2);
        return QKD3_OK;
    });
}

qkd3_status qkd3_binomial_tail(int n, double p, double t, double* out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = analysis::binomial_tail(n, p, t);
        return QKD3_OK;
    });
}

/* ------------------------------------------------------------------ */

qkd3_status qkd3_threshold_report_csv(double eps_min, double eps_max, double eps_step, char** out) {
    if (!out) return fail(QKD3_ERR_INVALID_ARGUMENT, "out must not be null");
    return guarded([&] {
        *out = dup_string(serialize::threshold_report_csv(eps_min, eps_max, eps_step));
        return QKD3_OK;
    });
}

qkd3_status qkd3_verify_run(uint32_t max_pairs, int perturb, uint64_t seed, char** out_json,
                            int* all_pass) {
    if (!out_json || !all_pass) return fail(QKD3_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> qkd3_status {
        verify::VerifyOptions opts;
        opts.max_pairs = max_pairs == 0 ? 4 : max_pairs;
        opts.perturb_bell = perturb != 0;
        opts.seed = seed;
        const verify::VerifyReport rep = verify::run_verification(opts);
        *out_json = dup_string(verify::report_to_json(rep));
        *all_pass = rep.all_pass ? 1 : 0;
        if (!rep.all_pass) {
            std::size_t failed = 0;
            for (const auto& r : rep.records)
                if (!r.pass) ++failed;
            return fail(QKD3_ERR_CHECK_FAILED,
                        std::to_string(failed) + " certification checks failed");
        }
        return QKD3_OK;
    });
}

} /* extern "C" */
