#include "protocol.hpp"

#include <cmath>
#include <stdexcept>

#include "qcore.hpp"

namespace qkd3::protocol {

namespace {

// floor/ceil with a nudge for values sitting on an integer boundary up to
// double rounding; the setup formulas are exact in real arithmetic.
std::size_t snapped_floor(double x) {
    return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

std::size_t snapped_ceil(double x) {
    return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

}  // namespace

ProtocolParams derive_params(std::size_t m, double eps, double tau, double tau_s) {
    if (m < 1) throw std::invalid_argument("derive_params: key length m must be >= 1");
    if (!(eps >= 0.0 && eps < 0.25))
        throw std::invalid_argument("derive_params: violated eps < 1/4");
    if (!(tau > 0.0) || !(eps / (1.0 - eps) + tau < 1.0))
        throw std::invalid_argument("derive_params: violated eps/(1-eps) < eps/(1-eps) + tau < 1");
    if (!(tau_s > 0.0 && tau_s < (1.0 - eps) / 3.0))
        throw std::invalid_argument("derive_params: violated 0 < tau_s < (1-eps)/3");

    ProtocolParams p;
    p.m = m;
    p.eps = eps;
    p.tau = tau;
    p.tau_s = tau_s;
    const double rate = gf2::shannon_rate_bound(eps, tau);
    p.r = snapped_ceil(static_cast<double>(m) / rate);
    if (p.r < m) p.r = m;
    p.s = snapped_floor(static_cast<double>(p.r) / (1.0 - eps));
    p.n = snapped_ceil(static_cast<double>(p.r) / ((1.0 - eps) / 3.0 - tau_s));
    p.d_k = (eps / (1.0 - eps) + tau) * static_cast<double>(p.r);
    return p;
}

SiftResult sift(const std::vector<int>& a, const std::vector<int>& b, std::size_t s) {
    if (a.size() != b.size()) throw std::invalid_argument("sift: basis vectors differ in length");
    SiftResult res;
    res.d.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        res.d[i] = ((b[i] - a[i]) % 3 + 3) % 3;
        if (res.d[i] == 0 && res.sifted.size() < s) res.sifted.push_back(i + 1);
    }
    res.failed = res.sifted.size() < s;
    return res;
}

ErrorDetection detect_errors(const std::vector<int>& alpha_s, const std::vector<int>& beta_s) {
    if (alpha_s.size() != beta_s.size())
        throw std::invalid_argument("detect_errors: bit strings differ in length");
    ErrorDetection det;
    det.e = gf2::BitVector(alpha_s.size());
    for (std::size_t i = 0; i < alpha_s.size(); ++i)
        if (alpha_s[i] == beta_s[i]) det.e.set(i, 1);
    return det;
}

bool validate(std::size_t error_count, std::size_t s, double eps) {
    return static_cast<double>(error_count) < eps * static_cast<double>(s);
}

Partition partition_reconciled(const std::vector<std::size_t>& sifted,
                               const std::vector<std::size_t>& error_set, std::size_t r) {
    Partition part;
    std::size_t err_pos = 0;
    for (std::size_t idx : sifted) {
        while (err_pos < error_set.size() && error_set[err_pos] < idx) ++err_pos;
        const bool in_error = err_pos < error_set.size() && error_set[err_pos] == idx;
        if (in_error) continue;
        if (part.reconciled.size() < r) part.reconciled.push_back(idx);
        else part.leftover.push_back(idx);
    }
    if (part.reconciled.size() < r)
        throw std::logic_error("partition_reconciled: fewer than r error-free sifted positions");
    return part;
}

ReconcileResult reconcile_oracle(std::size_t s, double eps) {
    ReconcileResult res;
    res.success = true;
    res.cost_bits = static_cast<double>(s) * gf2::binary_entropy(eps);
    return res;
}

gf2::BitVector privacy_amplify(const gf2::PrivacyMatrix& k, const gf2::BitVector& alpha_r,
                               bool validation_passed, RngStream& rng) {
    if (validation_passed) return gf2::apply_key_map(k, alpha_r);
    gf2::BitVector kappa(k.num_rows());
    for (std::size_t j = 0; j < k.num_rows(); ++j) kappa.set(j, rng.next_bit());
    return kappa;
}

double SessionRecord::sifted_error_rate() const {
    if (sift_failed || sifted_set.empty()) return 0.0;
    return static_cast<double>(error_count) / static_cast<double>(sifted_set.size());
}

std::optional<double> SessionRecord::net_gain_bits() const {
    if (!validation_passed) return std::nullopt;
    return static_cast<double>(params.m) - reconciliation_cost_bits;
}

SessionRecord run_session(const ProtocolParams& params, const adversary::EveStrategy& strategy,
                          const gf2::PrivacyMatrix& k, std::uint64_t seed) {
    if (k.num_rows() != params.m || k.num_cols() != params.r)
        throw std::invalid_argument("run_session: privacy matrix shape does not match params");
    if (!k.certified_min_weight || static_cast<double>(*k.certified_min_weight) <= params.d_k)
        throw std::invalid_argument("run_session: privacy matrix is not certified above d_k");

    SessionRecord rec;
    rec.params = params;
    rec.seed = seed;
    rec.strategy_spec = strategy.to_spec();
    rec.eve_view.kind = strategy.kind;

    const std::size_t n = params.n;
    RngStream alice_rng = make_stream(seed, RngPhase::AliceBases);
    RngStream bob_rng = make_stream(seed, RngPhase::BobBases);
    RngStream fallback_rng = make_stream(seed, RngPhase::PrivacyFallback);

    std::vector<int> b(n);
    rec.announcement.a.resize(n);
    rec.alice_bits.resize(n);
    rec.bob_bits.resize(n);
    rec.eve_view.pairs.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        rec.announcement.a[i] = static_cast<int>(alice_rng.next_below(3));
        b[i] = static_cast<int>(bob_rng.next_below(3));
        RngStream source_rng = make_stream(seed, RngPhase::Source, i);
        RngStream measure_rng = make_stream(seed, RngPhase::Measure, i);
        const adversary::EmittedPair emitted = adversary::emit_pair(strategy, source_rng);
        rec.eve_view.pairs[i] = emitted.view;
        const qcore::Outcome out =
            qcore::measure_pair(emitted.state, rec.announcement.a[i], b[i], measure_rng);
        rec.alice_bits[i] = out.alpha;
        rec.bob_bits[i] = out.beta;
    }

    const SiftResult sifted = sift(rec.announcement.a, b, params.s);
    rec.announcement.d = sifted.d;
    rec.sifted_set = sifted.sifted;
    rec.sift_failed = sifted.failed;

    if (rec.sift_failed) {
        rec.validation_passed = false;
        rec.alice_key = privacy_amplify(k, gf2::BitVector(params.r), false, fallback_rng);
        return rec;
    }

    std::vector<int> alpha_s, beta_s;
    alpha_s.reserve(params.s);
    beta_s.reserve(params.s);
    for (std::size_t idx : rec.sifted_set) {
        alpha_s.push_back(rec.alice_bits[idx - 1]);
        beta_s.push_back(rec.bob_bits[idx - 1]);
    }
    ErrorDetection det = detect_errors(alpha_s, beta_s);
    rec.announcement.e = det.e;
    rec.error_count = det.e.weight();
    for (std::size_t pos = 0; pos < rec.sifted_set.size(); ++pos)
        if (det.e.get(pos)) rec.error_set.push_back(rec.sifted_set[pos]);

    rec.validation_passed = validate(rec.error_count, params.s, params.eps);
    if (!rec.validation_passed) {
        rec.alice_key = privacy_amplify(k, gf2::BitVector(params.r), false, fallback_rng);
        return rec;
    }

    const Partition part = partition_reconciled(rec.sifted_set, rec.error_set, params.r);
    rec.reconciled_set = part.reconciled;
    rec.leftover_set = part.leftover;

    const ReconcileResult rc = reconcile_oracle(params.s, params.eps);
    rec.reconciliation_cost_bits = rc.cost_bits;

    gf2::BitVector alpha_r(params.r);
    gf2::BitVector bob_reconciled(params.r);
    for (std::size_t j = 0; j < params.r; ++j) {
        const std::size_t idx = rec.reconciled_set[j];
        alpha_r.set(j, rec.alice_bits[idx - 1]);
        // oracle reconciliation leaves Bob holding !beta corrected to alpha
        bob_reconciled.set(j, 1 - rec.bob_bits[idx - 1]);
    }

    rec.alice_key = privacy_amplify(k, alpha_r, true, fallback_rng);
    rec.bob_key = gf2::apply_key_map(k, bob_reconciled);
    return rec;
}

}  // namespace qkd3::protocol
