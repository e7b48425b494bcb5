// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] must point at the qkd3 CLI binary (used by the
// determinism criterion).

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "analysis.hpp"
#include "gf2codes.hpp"
#include "protocol.hpp"
#include "serialize.hpp"
#include "verify.hpp"

using namespace qkd3;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Failure {
    std::string reason;
};

void criterion(int num, const std::string& name, const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const Failure& f) {
        ok = false;
        detail = f.reason;
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!ok) ++g_failures;
    std::printf("[%s] %2d. %s: %s (%.2f s)\n", ok ? "PASS" : "FAIL", num, name.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
}

void require(bool cond, const std::string& reason) {
    if (!cond) throw Failure{reason};
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

gf2::PrivacyMatrix matrix_for(const protocol::ProtocolParams& p, std::uint64_t seed) {
    RngStream rng = make_stream(seed, RngPhase::MatrixSearch, 0);
    auto res = gf2::find_privacy_matrix(p.m, p.r, p.d_k, 100000, rng);
    require(res.matrix.has_value(), "privacy matrix search failed");
    return *res.matrix;
}

// chi-square 0.999 quantile at 15 degrees of freedom
constexpr double CHI2_15_999 = 37.697;

double chi_square_16(const std::vector<std::size_t>& counts) {
    double total = 0.0;
    for (std::size_t c : counts) total += static_cast<double>(c);
    const double expect = total / 16.0;
    double chi = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expect;
        chi += d * d / expect;
    }
    return chi;
}

std::string run_cli(const std::string& cli, const std::string& args, int expected_exit,
                    const std::string& tag) {
    const std::string cmd = "\"" + cli + "\" " + args;
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    require(code == expected_exit,
            tag + ": exit " + std::to_string(code) + ", expected " + std::to_string(expected_exit));
    return cmd;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(static_cast<bool>(in), "missing output file " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    const auto params8 = protocol::derive_params(8, 0.05, 0.1, 0.05);
    const auto matrix8 = matrix_for(params8, 41);
    const auto params4 = protocol::derive_params(4, 0.05, 0.1, 0.05);
    const auto matrix4 = matrix_for(params4, 42);

    criterion(1, "honest-channel exactness", [&] {
        const auto honest = adversary::EveStrategy::honest();
        std::size_t validated = 0, sifted_sessions = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            const auto rec = protocol::run_session(params8, honest, matrix8, seed);
            if (rec.sift_failed) continue;
            ++sifted_sessions;
            require(rec.error_count == 0, "nonzero sifted errors at seed " + std::to_string(seed));
            if (rec.validation_passed) {
                ++validated;
                require(rec.alice_key == rec.bob_key, "key mismatch at seed " + std::to_string(seed));
            }
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        require(validated > 8000, "too few validated sessions: " + std::to_string(validated));
        require(secs < 60.0, "runtime over one minute");
        return "10^4 sessions, zero errors in " + std::to_string(sifted_sessions) +
               " sifted, keys equal in " + std::to_string(validated) + " validated";
    });

    criterion(2, "intercept-resend error rate", [&] {
        const auto strategy = adversary::EveStrategy::intercept_resend({0, 1, 2});
        const double oracle = adversary::expected_error_rate(strategy);
        std::size_t sifted = 0, errors = 0;
        std::uint64_t seed = 0;
        const auto t0 = std::chrono::steady_clock::now();
        while (sifted < 120000) {
            const auto rec = protocol::run_session(params8, strategy, matrix8, seed++);
            if (rec.sift_failed) continue;
            sifted += rec.sifted_set.size();
            errors += rec.error_count;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double rate = static_cast<double>(errors) / static_cast<double>(sifted);
        require(std::abs(rate - 1.0 / 3.0) <= 0.005, "rate " + fmt(rate) + " off 1/3 by > 0.005");
        require(std::abs(rate - oracle) <= 0.005, "rate disagrees with the closed-form oracle");
        require(secs < 60.0, "runtime over one minute");
        return fmt(rate) + " over " + std::to_string(sifted) + " sifted positions (oracle " +
               fmt(oracle) + ")";
    });

    criterion(3, "Bell-diagonal rate law", [&] {
        std::string detail;
        for (double lambda : {0.1, 0.2, 0.4}) {
            const auto strategy = adversary::EveStrategy::bell_diagonal(
                {1.0 - 0.75 * lambda, lambda / 4.0, lambda / 4.0, lambda / 4.0});
            const auto per_basis_oracle = adversary::expected_error_rate_per_basis(strategy);
            std::size_t sifted = 0, errors = 0;
            std::size_t basis_sifted[3] = {0, 0, 0};
            std::size_t basis_errors[3] = {0, 0, 0};
            std::uint64_t seed = 1000000;
            while (sifted < 100000) {
                const auto rec = protocol::run_session(params8, strategy, matrix8, seed++);
                if (rec.sift_failed) continue;
                sifted += rec.sifted_set.size();
                errors += rec.error_count;
                for (std::size_t pos = 0; pos < rec.sifted_set.size(); ++pos) {
                    const std::size_t idx = rec.sifted_set[pos] - 1;
                    const int a = rec.announcement.a[idx];
                    ++basis_sifted[a];
                    basis_errors[a] += rec.announcement.e->get(pos);
                }
            }
            const double rate = static_cast<double>(errors) / static_cast<double>(sifted);
            require(std::abs(rate - lambda / 2.0) <= 0.005,
                    "lambda " + fmt(lambda) + ": rate " + fmt(rate) + " off lambda/2 by > 0.005");
            for (int a = 0; a < 3; ++a) {
                const double ra =
                    static_cast<double>(basis_errors[a]) / static_cast<double>(basis_sifted[a]);
                require(std::abs(ra - per_basis_oracle[a]) <= 0.01,
                        "lambda " + fmt(lambda) + ": basis " + std::to_string(a) + " rate " +
                            fmt(ra) + " off oracle by > 0.01");
            }
            detail += (detail.empty() ? "" : ", ") + fmt(lambda) + "->" + fmt(rate);
        }
        return "measured " + detail + " against lambda/2 and the per-basis sets";
    });

    criterion(4, "net-gain thresholds", [&] {
        const double e3 = analysis::solve_threshold(analysis::net_gain_three_basis, 1e-3, 0.2, 1e-6);
        const double e2 = analysis::solve_threshold(analysis::net_gain_two_basis, 1e-3, 0.2, 1e-6);
        auto scan = [&](double (*gain)(double)) {
            const double step = 1e-4;
            for (double x = 1e-3; x < 0.2; x += step)
                if (gain(x) > 0.0 && gain(x + step) <= 0.0) return x;
            throw Failure{"grid scan found no sign change"};
        };
        const double cell3 = scan(analysis::net_gain_three_basis);
        const double cell2 = scan(analysis::net_gain_two_basis);
        require(e3 >= cell3 - 2e-6 && e3 <= cell3 + 1e-4 + 2e-6,
                "three-basis root outside the scanned cell");
        require(e2 >= cell2 - 2e-6 && e2 <= cell2 + 1e-4 + 2e-6,
                "two-basis root outside the scanned cell");
        require(e3 > e2, "three-basis threshold not larger");
        return "three-basis " + fmt(e3) + ", two-basis " + fmt(e2);
    });

    // criteria 5..10 are certified by the verification suite on its full grid
    verify::VerifyOptions vopts;
    vopts.max_pairs = 4;
    vopts.seed = 1;
    const auto vt0 = std::chrono::steady_clock::now();
    const auto report = verify::run_verification(vopts);
    const double verify_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - vt0).count();
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // name -> (pass, total)
    for (const auto& rec : report.records) {
        auto& t = tally[rec.name];
        t.first += rec.pass ? 1 : 0;
        t.second += 1;
    }
    auto all_named = [&](const std::vector<std::string>& names) {
        std::size_t pass = 0, total = 0;
        for (const auto& n : names) {
            auto it = tally.find(n);
            require(it != tally.end() && it->second.second > 0, "missing check " + n);
            pass += it->second.first;
            total += it->second.second;
        }
        require(pass == total,
                std::to_string(total - pass) + " of " + std::to_string(total) + " records failed");
        return std::to_string(total);
    };

    criterion(5, "spectral bound certification", [&] {
        const std::string total = all_named({"spectral_bound_theta"});
        require(verify_secs < 300.0, "verification grid over five minutes");
        return total + " instances Bell-diagonal with max eigenvalue <= theta(r) (suite " +
               fmt(verify_secs) + " s)";
    });

    criterion(6, "operator identities", [&] {
        const std::string total = all_named({"x_site_two_routes", "y_site_two_routes",
                                             "sum_fp_closed_vs_explicit", "fp_marginalizes_fpk"});
        return total + " identity checks below 1e-12";
    });

    criterion(7, "single-site overlap identity", [&] {
        const std::string total =
            all_named({"scalar_identity_exhaustive_r1", "scalar_identity_random"});
        return total + " checks: 12 exhaustive cases and 1000 random draws at r <= 6";
    });

    criterion(8, "character-sum identity", [&] {
        all_named({"character_sum_identity"});
        return "exact integer equality over all (kappa, g) for the certified family";
    });

    criterion(9, "binomial tail inequality", [&] {
        all_named({"binomial_tail_inequality"});
        return "exact tail <= exp(-2 t^2 n) across the full grid";
    });

    criterion(10, "conditional-entropy lemma", [&] {
        all_named({"conditional_entropy_lemma"});
        return "10^4 random joint tables satisfy the bound";
    });

    criterion(11, "key uniformity", [&] {
        const auto honest = adversary::EveStrategy::honest();
        std::vector<std::size_t> counts(16, 0);
        for (std::uint64_t seed = 0; seed < 100000; ++seed) {
            const auto rec = protocol::run_session(params4, honest, matrix4, seed);
            std::size_t idx = 0;
            for (std::size_t j = 0; j < 4; ++j) idx |= static_cast<std::size_t>(rec.alice_key.get(j)) << j;
            ++counts[idx];
        }
        const double chi_honest = chi_square_16(counts);
        require(chi_honest < CHI2_15_999,
                "honest-key chi-square " + fmt(chi_honest) + " >= " + fmt(CHI2_15_999));

        const auto intercept = adversary::EveStrategy::intercept_resend({0, 1, 2});
        std::vector<std::size_t> fallback(16, 0);
        std::size_t collected = 0;
        std::uint64_t seed = 500000;
        while (collected < 100000) {
            const auto rec = protocol::run_session(params4, intercept, matrix4, seed++);
            if (rec.validation_passed) continue;
            std::size_t idx = 0;
            for (std::size_t j = 0; j < 4; ++j) idx |= static_cast<std::size_t>(rec.alice_key.get(j)) << j;
            ++fallback[idx];
            ++collected;
        }
        const double chi_fallback = chi_square_16(fallback);
        require(chi_fallback < CHI2_15_999,
                "fallback-key chi-square " + fmt(chi_fallback) + " >= " + fmt(CHI2_15_999));
        return "chi-square honest " + fmt(chi_honest) + ", fallback " + fmt(chi_fallback) +
               " (critical " + fmt(CHI2_15_999) + ")";
    });

    criterion(12, "command determinism", [&] {
        require(!cli.empty(), "CLI path missing: pass the qkd3 binary as argv[1]");
        const fs::path dir = fs::temp_directory_path() /
                             ("qkd3_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        struct Cmd {
            std::string name;
            std::string args;
            int exit_code;
        };
        const std::vector<Cmd> cmds = {
            {"run", "run -m 4 --seed 7", 0},
            {"run_intercept", "run -m 4 --seed 7 --strategy \"intercept{bases=[0,1,2]}\"", 3},
            {"sweep", "sweep -m 4 --trials 20 --seed 11", 0},
            {"sweep_lambda", "sweep -m 4 --var lambda --values 0.2,0.4 --trials 10 --seed 11", 0},
            {"sweep_json", "sweep -m 4 --trials 20 --seed 11 --format json", 0},
            {"threshold", "threshold --eps-min 0.05 --eps-max 0.15 --step 0.01", 0},
            {"genmatrix", "genmatrix -m 6 --eps 0.05 --tau 0.1 --seed 3", 0},
            {"verify", "verify --max-n 2 --seed 1", 0},
        };
        for (const auto& c : cmds) {
            const fs::path out1 = dir / (c.name + "_1.out");
            const fs::path out2 = dir / (c.name + "_2.out");
            run_cli(cli, c.args + " -o " + out1.string(), c.exit_code, c.name);
            run_cli(cli, c.args + " -o " + out2.string(), c.exit_code, c.name);
            require(slurp(out1) == slurp(out2), c.name + ": repeated outputs differ");
            require(!slurp(out1).empty(), c.name + ": empty output");
        }
        // different seed must change the session document
        const fs::path other = dir / "run_other.out";
        run_cli(cli, "run -m 4 --seed 8 -o " + other.string(), 0, "run");
        require(slurp(other) != slurp(dir / "run_1.out"), "seed change did not change output");
        fs::remove_all(dir);
        return std::to_string(cmds.size()) + " commands byte-identical across repeated invocations";
    });

    if (g_failures == 0) {
        std::printf("acceptance: all 12 criteria passed\n");
    } else {
        std::printf("acceptance: %d criteria FAILED\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
