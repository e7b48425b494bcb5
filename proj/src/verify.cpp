#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "analysis.hpp"
#include "gf2codes.hpp"
#include "proofcheck.hpp"
#include "qcore.hpp"
#include "rng.hpp"

namespace qkd3::verify {

namespace {

using proofcheck::Matrix;
using proofcheck::Pattern;
using proofcheck::TinyInstance;
using proofcheck::Vector;

constexpr double STRUCT_TOL = proofcheck::STRUCT_TOL;
constexpr double PSD_TOL = proofcheck::PSD_TOL;

void add(VerifyReport& rep, std::string name, std::string instance, double value, double bound,
         bool pass, std::string note = {}) {
    rep.records.push_back({std::move(name), std::move(instance), value, bound, pass, std::move(note)});
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    return solver.eigenvalues().minCoeff();
}

std::vector<double> sorted_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    std::vector<double> e(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(e.begin(), e.end());
    return e;
}

void check_bell_structure(VerifyReport& rep, const Matrix& bell) {
    const Matrix gram = bell.adjoint() * bell;
    const double gram_res = (gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff();
    add(rep, "bell_gram_identity", "", gram_res, STRUCT_TOL, gram_res < STRUCT_TOL);

    double basis_res = 0.0;
    for (int a = 0; a < 3; ++a) {
        const auto k0 = qcore::basis_ket(a, 0);
        const auto k1 = qcore::basis_ket(a, 1);
        basis_res = std::max(basis_res, std::abs(std::abs(qcore::inner(k0, k0)) - 1.0));
        basis_res = std::max(basis_res, std::abs(std::abs(qcore::inner(k1, k1)) - 1.0));
        basis_res = std::max(basis_res, std::abs(qcore::inner(k0, k1)));
    }
    add(rep, "measurement_bases_orthonormal", "", basis_res, STRUCT_TOL, basis_res < STRUCT_TOL);
}

void check_xy_sites(VerifyReport& rep, const Matrix& bell) {
    const double devx = (proofcheck::x_site(bell) - proofcheck::x_site_from_bases()).cwiseAbs().maxCoeff();
    const double devy = (proofcheck::y_site(bell) - proofcheck::y_site_from_bases()).cwiseAbs().maxCoeff();
    add(rep, "x_site_two_routes", "", devx, STRUCT_TOL, devx < STRUCT_TOL);
    add(rep, "y_site_two_routes", "", devy, STRUCT_TOL, devy < STRUCT_TOL);

    // raw basis-projector sums have Bell-diagonal spectra {1,1,1,3} and {0,2,2,2}
    const std::vector<double> ex = {1.0, 1.0, 1.0, 3.0};
    const std::vector<double> ey = {0.0, 2.0, 2.0, 2.0};
    double dev = 0.0;
    const std::vector<double> sx = sorted_eigenvalues(3.0 * proofcheck::x_site_from_bases());
    const std::vector<double> sy = sorted_eigenvalues(3.0 * proofcheck::y_site_from_bases());
    for (int i = 0; i < 4; ++i)
        dev = std::max({dev, std::abs(sx[i] - ex[i]), std::abs(sy[i] - ey[i])});
    add(rep, "xy_projector_sum_spectra", "", dev, STRUCT_TOL, dev < STRUCT_TOL);
}

void check_scalar_identity(VerifyReport& rep, const Matrix& bell, std::uint64_t seed) {
    const double dev1 = proofcheck::verify_scalar_identity_site(bell);
    add(rep, "scalar_identity_exhaustive_r1", "12 cases", dev1, STRUCT_TOL, dev1 < STRUCT_TOL);
    const double devr = proofcheck::verify_scalar_identity(6, 1000, seed);
    add(rep, "scalar_identity_random", "r<=6, 1000 draws", devr, STRUCT_TOL, devr < STRUCT_TOL);
}

void check_fc_completeness(VerifyReport& rep) {
    // sum over all outcomes of F_C equals pr(a) pr(b) identity, n = 2
    double dev = 0.0;
    for (int a0 = 0; a0 < 3; ++a0)
        for (int a1 = 0; a1 < 3; ++a1)
            for (int b0 = 0; b0 < 3; ++b0)
                for (int b1 = 0; b1 < 3; ++b1) {
                    Matrix sum = Matrix::Zero(16, 16);
                    for (int bits = 0; bits < 16; ++bits) {
                        const Matrix m0 =
                            proofcheck::outcome_projector(a0, b0, (bits >> 3) & 1, (bits >> 1) & 1);
                        const Matrix m1 =
                            proofcheck::outcome_projector(a1, b1, (bits >> 2) & 1, bits & 1);
                        sum += proofcheck::kron_sites({m0, m1});
                    }
                    sum /= 81.0;  // pr(a) pr(b) = 3^-2 * 3^-2
                    dev = std::max(dev, (sum - Matrix::Identity(16, 16) / 81.0).cwiseAbs().maxCoeff());
                }
    add(rep, "fc_outcome_completeness", "n=2, all basis pairs", dev, STRUCT_TOL, dev < STRUCT_TOL);
}

gf2::PrivacyMatrix literal_matrix(const std::vector<std::string>& rows) {
    gf2::PrivacyMatrix k;
    for (const std::string& row : rows) {
        gf2::BitVector v(row.size());
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] == '1') v.set(j, 1);
        k.rows.push_back(std::move(v));
    }
    k.certified_min_weight = gf2::code_min_weight(k);
    return k;
}

void check_fp_operators(VerifyReport& rep, const Matrix& bell) {
    // structural instances, E and T both exercised (eps here only gates the
    // announcement enumeration, identities hold for any admissible pattern)
    struct Case {
        TinyInstance inst;
        std::vector<int> d;
        std::vector<int> e;
    };
    const std::vector<Case> cases = {
        {{1, 1, 1, 0.5, 0.5, 0.6}, {0}, {0}},
        {{2, 2, 1, 0.6, 0.5, 0.8}, {0, 0}, {0, 1}},
        {{2, 1, 1, 0.5, 0.5, 0.6}, {0, 2}, {0}},
        {{3, 3, 2, 0.5, 0.5, 1.2}, {0, 0, 0}, {0, 1, 0}},
        {{3, 2, 1, 0.5, 0.5, 0.7}, {1, 0, 0}, {0, 0}},
    };

    double closed_dev = 0.0;
    double psd_worst = 0.0;
    for (const Case& c : cases) {
        const Pattern pat = proofcheck::make_pattern(c.inst, c.d, c.e);
        const Matrix closed = proofcheck::sum_fp_closed(c.inst, pat, bell);
        const Matrix expl = proofcheck::sum_fp_explicit(c.inst, pat);
        closed_dev = std::max(closed_dev, (closed - expl).cwiseAbs().maxCoeff());
        psd_worst = std::min({psd_worst, min_eigenvalue(expl),
                              min_eigenvalue(proofcheck::fp_single(c.inst, pat, std::vector<int>(c.inst.n, 1)))});
    }
    add(rep, "sum_fp_closed_vs_explicit", "n<=3 announcement set", closed_dev, STRUCT_TOL,
        closed_dev < STRUCT_TOL);

    // marginalization: F_P = sum_kappa F_{P,kappa}
    const gf2::PrivacyMatrix k2 = literal_matrix({"110", "011"});
    const gf2::PrivacyMatrix k1 = literal_matrix({"11"});
    double marg_dev = 0.0;
    {
        const TinyInstance inst{3, 3, 3, 0.5, 0.5, 1.2};
        const Pattern pat = proofcheck::make_pattern(inst, {0, 0, 0}, {0, 0, 0});
        for (const std::vector<int>& a : {std::vector<int>{0, 1, 2}, std::vector<int>{2, 2, 0}}) {
            Matrix sum = Matrix::Zero(64, 64);
            for (std::uint32_t kb = 0; kb < 4; ++kb) {
                gf2::BitVector kappa(2);
                kappa.set(0, kb & 1);
                kappa.set(1, (kb >> 1) & 1);
                sum += proofcheck::fpk_single(inst, pat, a, k2, kappa);
                psd_worst = std::min(psd_worst, min_eigenvalue(proofcheck::fpk_single(inst, pat, a, k2, kappa)));
            }
            marg_dev = std::max(marg_dev, (sum - proofcheck::fp_single(inst, pat, a)).cwiseAbs().maxCoeff());
        }
    }
    {
        const TinyInstance inst{3, 3, 2, 0.5, 0.5, 0.8};
        const Pattern pat = proofcheck::make_pattern(inst, {0, 0, 0}, {0, 1, 0});
        for (const std::vector<int>& a : {std::vector<int>{1, 0, 2}}) {
            Matrix sum = Matrix::Zero(64, 64);
            for (std::uint32_t kb = 0; kb < 2; ++kb) {
                gf2::BitVector kappa(1);
                kappa.set(0, kb & 1);
                sum += proofcheck::fpk_single(inst, pat, a, k1, kappa);
            }
            marg_dev = std::max(marg_dev, (sum - proofcheck::fp_single(inst, pat, a)).cwiseAbs().maxCoeff());
        }
    }
    add(rep, "fp_marginalizes_fpk", "n=3, E/T exercised", marg_dev, STRUCT_TOL, marg_dev < STRUCT_TOL);
    add(rep, "f_operators_positive", "constructed F set", psd_worst, -PSD_TOL, psd_worst >= -PSD_TOL,
        "minimum eigenvalue across constructed operators");

    // Pi_R: projector law and rank
    {
        const std::vector<std::size_t> r_sites = {0, 2};
        const double d_k = 1.5;
        const Matrix pi = proofcheck::projector_pi_r(r_sites, d_k, 3, bell);
        const double idem = (pi * pi - pi).cwiseAbs().maxCoeff();
        std::size_t expected_rank = 0;
        for (std::size_t word = 0; word < 64; ++word)
            if (proofcheck::bell_weight_on(word, r_sites, 3) >= d_k / 2.0) ++expected_rank;
        const double rank_dev = std::abs(pi.trace().real() - static_cast<double>(expected_rank));
        const bool ok = idem < STRUCT_TOL && rank_dev < 1e-9;
        add(rep, "pi_r_projector_law", "n=3, |R|=2, d_k=1.5", std::max(idem, rank_dev), STRUCT_TOL, ok,
            "idempotency residual and Bell-word rank");
    }
}

void check_spectral_bound(VerifyReport& rep, const VerifyOptions& opts, const Matrix& bell) {
    for (const TinyInstance& inst : spectral_bound_grid(opts.max_pairs)) {
        const auto res = proofcheck::certify_spectral_bound(inst, bell);
        ++rep.spectral_bound_instances;
        std::ostringstream note;
        note << "offdiag=" << res.offdiag_residual << " routes=" << res.route_residual
             << " per_d_margin=" << res.per_d_margin << " terms=" << res.term_count
             << " setup_relation=" << (res.setup_relation_holds ? "yes" : "no")
             << " d_enum={0,1,2}^n";
        add(rep, "spectral_bound_theta", inst.describe(), res.max_eigenvalue,
            res.theta_bound, res.pass, note.str());
    }
}

void check_binomial_tail(VerifyReport& rep) {
    double worst = -1.0;
    for (int n = 1; n <= 60; ++n) {
        for (int pi = 1; pi <= 9; ++pi) {
            const double p = pi / 10.0;
            for (int ti = 1; ti <= 2 * pi; ++ti) {
                const double t = ti / 20.0;
                const double tail = analysis::binomial_tail(n, p, t);
                const double bound = std::exp(-2.0 * t * t * n);
                worst = std::max(worst, tail - bound);
            }
        }
    }
    add(rep, "binomial_tail_inequality", "n<=60, p in {0.1..0.9}, t in {0.05..p}", worst, 0.0,
        worst <= 0.0, "max of tail - exp(-2 t^2 n) over the grid");
}

void check_entropy_lemma(VerifyReport& rep, std::uint64_t seed) {
    RngStream rng(mix_key(seed, 200, 0));
    double min_slack = 1e18;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t nx = 2 + rng.next_below(7);
        const std::size_t ny = 2 + rng.next_below(7);
        analysis::JointTable joint(nx, std::vector<double>(ny, 0.0));
        double total = 0.0;
        for (auto& row : joint)
            for (double& v : row) {
                v = -std::log(1.0 - rng.next_double());
                total += v;
            }
        for (auto& row : joint)
            for (double& v : row) v /= total;
        const double mu = analysis::l1_uniformity_statistic(joint);
        const double h = analysis::conditional_entropy(joint);
        min_slack = std::min(min_slack, h - analysis::entropy_lemma_bound(nx, mu));
    }
    add(rep, "conditional_entropy_lemma", "10^4 random joint tables, |X|,|Y| <= 8", min_slack, 0.0,
        min_slack >= -STRUCT_TOL, "min of H(x|y) - ((1-mu) log2|X| - mu/ln2)");
}

void check_entropy_bound_rederivation(VerifyReport& rep) {
    double worst = 0.0;
    for (double m : {1.0, 16.0, 100.0}) {
        for (double r : {10.0, 128.0, 10000.0}) {
            for (double tau : {0.1, 0.2, 0.5, 0.9}) {
                const double th = std::exp(-tau * tau * tau * r / 16.0);
                const double expected = m - 2.0 * (m + 1.0 / std::log(2.0)) * (th + 2.0 * std::sqrt(th));
                worst = std::max(worst, std::abs(analysis::entropy_lower_bound(m, r, tau) - expected));
            }
        }
    }
    add(rep, "entropy_bound_rederivation", "m/r/tau grid", worst, STRUCT_TOL, worst < STRUCT_TOL);
}

void check_thresholds(VerifyReport& rep) {
    struct Proto {
        const char* name;
        double (*gain)(double);
    };
    const Proto protos[2] = {{"three_basis", analysis::net_gain_three_basis},
                             {"two_basis", analysis::net_gain_two_basis}};
    double roots[2] = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        const double root = analysis::solve_threshold(protos[i].gain, 1e-3, 0.2, 1e-6);
        roots[i] = root;
        // independent sign scan on a 1e-4 grid
        double cell_lo = 0.0;
        const double step = 1e-4;
        for (double x = 1e-3; x < 0.2; x += step) {
            if (protos[i].gain(x) > 0.0 && protos[i].gain(x + step) <= 0.0) {
                cell_lo = x;
                break;
            }
        }
        const double excess =
            std::max({0.0, cell_lo - 2e-6 - root, root - (cell_lo + step + 2e-6)});
        std::ostringstream note;
        note << "bisection root " << root << ", scan cell [" << cell_lo << ", " << cell_lo + step << "]";
        add(rep, std::string("threshold_bisection_vs_scan_") + protos[i].name, "", excess, 0.0,
            excess == 0.0, note.str());
    }
    add(rep, "threshold_ordering", "", roots[0] - roots[1], 0.0, roots[0] > roots[1],
        "three-basis root minus two-basis root; must be positive");
}

void check_character_sum(VerifyReport& rep, std::uint64_t seed) {
    std::vector<gf2::PrivacyMatrix> family;
    family.push_back(literal_matrix({"11"}));
    family.push_back(literal_matrix({"10", "01"}));
    struct Want {
        std::size_t m, r;
        double d_k;
    };
    const std::vector<Want> wanted = {{1, 5, 2.0}, {2, 6, 1.5}, {3, 8, 2.0}, {4, 10, 2.5}, {4, 7, 1.1}};
    for (const Want& w : wanted) {
        RngStream rng = make_stream(seed, RngPhase::MatrixSearch, w.m * 100 + w.r);
        const auto found = gf2::find_privacy_matrix(w.m, w.r, w.d_k, 20000, rng);
        if (found.matrix) family.push_back(*found.matrix);
    }
    std::size_t failures = 0;
    for (const auto& k : family)
        if (!proofcheck::verify_pa_sum_identity(k)) ++failures;
    std::ostringstream inst;
    inst << family.size() << " certified matrices, r <= 10, m <= 4";
    add(rep, "character_sum_identity", inst.str(), static_cast<double>(failures), 0.0,
        failures == 0 && family.size() == wanted.size() + 2, "exact integer equality over all (kappa, g)");
}

void check_key_fibers(VerifyReport& rep, std::uint64_t seed) {
    // full-rank K maps exactly 2^(r-m) inputs onto every key
    double worst = 0.0;
    for (const auto& [m, r] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 4}, {2, 6}, {3, 9}, {4, 11}}) {
        RngStream rng = make_stream(seed, RngPhase::MatrixSearch, 7000 + m);
        const auto found = gf2::find_privacy_matrix(m, r, 0.5, 20000, rng);
        if (!found.matrix) {
            worst = 1e18;
            break;
        }
        std::vector<std::size_t> counts(std::size_t{1} << m, 0);
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << r); ++bits) {
            gf2::BitVector alpha(r);
            for (std::size_t j = 0; j < r; ++j) alpha.set(j, (bits >> j) & 1u);
            const gf2::BitVector kappa = gf2::apply_key_map(*found.matrix, alpha);
            std::uint64_t idx = 0;
            for (std::size_t j = 0; j < m; ++j) idx |= static_cast<std::uint64_t>(kappa.get(j)) << j;
            ++counts[idx];
        }
        const double expected = std::pow(2.0, static_cast<double>(r - m));
        for (std::size_t c : counts) worst = std::max(worst, std::abs(static_cast<double>(c) - expected));
    }
    add(rep, "key_map_equal_fibers", "full-rank K, r <= 11", worst, 0.0, worst == 0.0,
        "every key has exactly 2^(r-m) preimages");
}

void check_shannon_monotone(VerifyReport& rep) {
    double worst = 0.0;
    for (int ei = 1; ei <= 20; ++ei) {
        for (int ti = 1; ti <= 25; ++ti) {
            const double eps = ei / 100.0;
            const double tau = ti / 50.0;
            const double v = gf2::shannon_rate_bound(eps, tau);
            if (!(v > 0.0 && v <= 1.0)) worst = std::max(worst, 1.0);
            if (ei > 1) worst = std::max(worst, v - gf2::shannon_rate_bound((ei - 1) / 100.0, tau));
            if (ti > 1) worst = std::max(worst, v - gf2::shannon_rate_bound(eps, (ti - 1) / 50.0));
        }
    }
    add(rep, "shannon_rate_bound_monotone", "eps <= 0.20, tau <= 0.50", worst, 0.0, worst <= 0.0,
        "in (0,1] and decreasing in both arguments");
}

}  // namespace

std::vector<TinyInstance> spectral_bound_grid(std::size_t max_pairs) {
    const std::vector<double> eps_grid = {0.05, 0.10, 0.15, 0.20};
    const std::vector<double> tau_fracs = {0.25, 0.50, 0.75};
    std::vector<TinyInstance> grid;
    for (std::size_t n = 1; n <= max_pairs; ++n) {
        for (std::size_t s = 1; s <= n; ++s) {
            for (std::size_t r = 1; r <= s; ++r) {
                for (double eps : eps_grid) {
                    for (double frac : tau_fracs) {
                        TinyInstance inst;
                        inst.n = n;
                        inst.s = s;
                        inst.r = r;
                        inst.eps = eps;
                        inst.tau = frac * (1.0 - eps / (1.0 - eps));
                        inst.d_k = (eps / (1.0 - eps) + inst.tau) * static_cast<double>(r);
                        grid.push_back(inst);
                    }
                }
            }
        }
    }
    if (max_pairs >= 4) {
        // r < s with a nonempty error set needs eps*s > 1; smallest such case
        TinyInstance inst;
        inst.n = 5;
        inst.s = 5;
        inst.r = 4;
        inst.eps = 0.22;
        inst.tau = 0.5 * (1.0 - inst.eps / (1.0 - inst.eps));
        inst.d_k = (inst.eps / (1.0 - inst.eps) + inst.tau) * static_cast<double>(inst.r);
        grid.push_back(inst);
    }
    return grid;
}

VerifyReport run_verification(const VerifyOptions& opts) {
    if (opts.max_pairs < 1 || opts.max_pairs > proofcheck::MAX_PAIRS)
        throw std::invalid_argument("run_verification: max_pairs must be in 1..5");
    VerifyReport rep;
    rep.perturbed = opts.perturb_bell;
    const Matrix bell = proofcheck::bell_basis_matrix(opts.perturb_bell);

    check_bell_structure(rep, bell);
    check_xy_sites(rep, bell);
    check_scalar_identity(rep, bell, opts.seed);
    check_fc_completeness(rep);
    check_fp_operators(rep, bell);
    check_spectral_bound(rep, opts, bell);
    check_binomial_tail(rep);
    check_entropy_lemma(rep, opts.seed);
    check_entropy_bound_rederivation(rep);
    check_thresholds(rep);
    check_character_sum(rep, opts.seed);
    check_key_fibers(rep, opts.seed);
    check_shannon_monotone(rep);

    rep.all_pass = std::all_of(rep.records.begin(), rep.records.end(),
                               [](const CheckRecord& r) { return r.pass; });
    return rep;
}

std::string report_to_json(const VerifyReport& rep) {
    nlohmann::ordered_json doc;
    doc["format"] = "qkd3.verify.v1";
    doc["perturbed"] = rep.perturbed;
    std::size_t passed = 0;
    for (const auto& r : rep.records)
        if (r.pass) ++passed;
    nlohmann::ordered_json summary;
    summary["checks"] = rep.records.size();
    summary["passed"] = passed;
    summary["failed"] = rep.records.size() - passed;
    summary["spectral_bound_instances"] = rep.spectral_bound_instances;
    summary["all_pass"] = rep.all_pass;
    doc["summary"] = summary;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& r : rep.records) {
        nlohmann::ordered_json c;
        c["name"] = r.name;
        c["instance"] = r.instance;
        c["value"] = r.value;
        c["bound"] = r.bound;
        c["pass"] = r.pass;
        if (!r.note.empty()) c["note"] = r.note;
        checks.push_back(c);
    }
    doc["checks"] = checks;
    return doc.dump(2) + "\n";
}

}  // namespace qkd3::verify
