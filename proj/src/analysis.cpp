#include "analysis.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "gf2codes.hpp"

namespace qkd3::analysis {

using gf2::binary_entropy;

double theta(double r, double tau) {
    if (r < 0.0) throw std::domain_error("theta: r must be nonnegative");
    if (!(tau > 0.0)) throw std::domain_error("theta: tau must be positive");
    return std::exp(-tau * tau * tau * r / 16.0);
}

double entropy_lower_bound(double m, double r, double tau) {
    const double th = theta(r, tau);
    return m - 2.0 * (m + 1.0 / std::log(2.0)) * (th + 2.0 * std::sqrt(th));
}

double net_gain_three_basis(double eps) {
    if (!(eps >= 0.0 && eps < 0.25))
        throw std::domain_error("net_gain_three_basis: need 0 <= eps < 1/4");
    return 1.0 - binary_entropy(0.5 * eps / (1.0 - eps)) - binary_entropy(eps) / (1.0 - eps);
}

double net_gain_two_basis(double eps) {
    if (!(eps >= 0.0) || eps / (1.0 - eps) > 0.5)
        throw std::domain_error("net_gain_two_basis: need 0 <= eps/(1-eps) <= 1/2");
    return 1.0 - binary_entropy(eps / (1.0 - eps)) - binary_entropy(eps) / (1.0 - eps);
}

double solve_threshold(const std::function<double(double)>& gain_fn, double lo, double hi,
                       double tol) {
    if (!(lo < hi) || !(tol > 0.0)) throw std::invalid_argument("solve_threshold: bad bracket");
    double flo = gain_fn(lo);
    double fhi = gain_fn(hi);
    if (!(flo > 0.0 && fhi < 0.0))
        throw std::invalid_argument("solve_threshold: no sign change on the bracket");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (gain_fn(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

KeyRateReport key_rate_report(double eps_min, double eps_max, double eps_step) {
    if (!(eps_min > 0.0) || !(eps_step > 0.0) || !(eps_max >= eps_min))
        throw std::invalid_argument("key_rate_report: bad grid");
    KeyRateReport rep;
    for (double e = eps_min; e <= eps_max + 1e-12; e += eps_step) {
        rep.eps_grid.push_back(e);
        rep.gain2.push_back(net_gain_two_basis(e));
        rep.gain3.push_back(net_gain_three_basis(e));
    }
    rep.threshold2 = solve_threshold(net_gain_two_basis, 1e-3, 0.2);
    rep.threshold3 = solve_threshold(net_gain_three_basis, 1e-3, 0.2);
    return rep;
}

double binomial_tail(int n, double p, double t) {
    if (n < 1) throw std::domain_error("binomial_tail: n must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("binomial_tail: need 0 < p < 1");
    if (!(t >= 0.0 && t <= p)) throw std::domain_error("binomial_tail: need 0 <= t <= p");
    const double cutoff = (p - t) * static_cast<double>(n);
    // term_k = C(n,k) p^k (1-p)^(n-k), updated multiplicatively for stability
    double term = std::pow(1.0 - p, n);
    double sum = 0.0;
    for (int k = 0; static_cast<double>(k) < cutoff && k <= n; ++k) {
        sum += term;
        term *= (static_cast<double>(n - k) / static_cast<double>(k + 1)) * (p / (1.0 - p));
    }
    return sum;
}

double entropy_lemma_bound(std::size_t alphabet_size, double mu) {
    if (alphabet_size < 1) throw std::domain_error("entropy_lemma_bound: alphabet must be nonempty");
    if (mu < 0.0) throw std::domain_error("entropy_lemma_bound: mu must be nonnegative");
    return (1.0 - mu) * std::log2(static_cast<double>(alphabet_size)) - mu / std::log(2.0);
}

namespace {

double table_sum(const JointTable& joint) {
    double s = 0.0;
    for (const auto& row : joint)
        for (double v : row) {
            if (v < 0.0) throw std::invalid_argument("joint table: negative entry");
            s += v;
        }
    return s;
}

}  // namespace

double l1_uniformity_statistic(const JointTable& joint) {
    if (joint.empty() || joint[0].empty()) throw std::invalid_argument("joint table: empty");
    if (std::abs(table_sum(joint) - 1.0) > 1e-9)
        throw std::invalid_argument("joint table: not normalized");
    const std::size_t nx = joint.size();
    const std::size_t ny = joint[0].size();
    std::vector<double> py(ny, 0.0);
    for (const auto& row : joint) {
        if (row.size() != ny) throw std::invalid_argument("joint table: ragged rows");
        for (std::size_t y = 0; y < ny; ++y) py[y] += row[y];
    }
    double mu = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            mu += std::abs(joint[x][y] - py[y] / static_cast<double>(nx));
    return mu;
}

double conditional_entropy(const JointTable& joint) {
    if (joint.empty() || joint[0].empty()) throw std::invalid_argument("joint table: empty");
    if (std::abs(table_sum(joint) - 1.0) > 1e-9)
        throw std::invalid_argument("joint table: not normalized");
    const std::size_t ny = joint[0].size();
    double h = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
        double py = 0.0;
        for (const auto& row : joint) py += row[y];
        if (py <= 0.0) continue;
        for (const auto& row : joint) {
            const double pxy = row[y];
            if (pxy > 0.0) h -= pxy * std::log2(pxy / py);
        }
    }
    return h;
}

double empirical_conditional_entropy(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& samples) {
    if (samples.empty()) throw std::invalid_argument("empirical_conditional_entropy: no samples");
    std::map<std::uint64_t, std::map<std::uint64_t, std::size_t>> by_v;
    for (const auto& [kappa, v] : samples) ++by_v[v][kappa];
    const double n = static_cast<double>(samples.size());
    double h = 0.0;
    for (const auto& [v, kappas] : by_v) {
        double nv = 0.0;
        for (const auto& [kappa, count] : kappas) nv += static_cast<double>(count);
        double hv = 0.0;
        for (const auto& [kappa, count] : kappas) {
            const double q = static_cast<double>(count) / nv;
            hv -= q * std::log2(q);
        }
        h += (nv / n) * hv;
    }
    return h;
}

}  // namespace qkd3::analysis
