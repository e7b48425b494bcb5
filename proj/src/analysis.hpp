#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace qkd3::analysis {

// Security decay factor exp(-tau^3 r / 16).
double theta(double r, double tau);

// Key-entropy floor m - 2(m + 1/ln2)(theta + 2 sqrt(theta)). May be negative
// (vacuous) for small r; returned unchanged.
double entropy_lower_bound(double m, double r, double tau);

// Net key gain per sifted bit, three-basis protocol:
//   1 - h(eps/(2(1-eps))) - h(eps)/(1-eps).
// Throws std::domain_error for eps outside [0, 1/4).
double net_gain_three_basis(double eps);

// Net key gain per sifted bit, two-basis protocol:
//   1 - h(eps/(1-eps)) - h(eps)/(1-eps).
// Domain guard eps/(1-eps) <= 1/2.
double net_gain_two_basis(double eps);

// Bracketing bisection: requires gain_fn(lo) > 0 > gain_fn(hi), returns the
// midpoint of the final interval of width <= tol.
double solve_threshold(const std::function<double(double)>& gain_fn, double lo, double hi,
                       double tol = 1e-6);

struct KeyRateReport {
    std::vector<double> eps_grid;
    std::vector<double> gain2;
    std::vector<double> gain3;
    double threshold2 = 0.0;
    double threshold3 = 0.0;
};

KeyRateReport key_rate_report(double eps_min, double eps_max, double eps_step);

// Lower binomial tail: sum over k < (p - t) n of C(n,k) p^k (1-p)^(n-k);
// empty (zero) when t = p. Throws std::domain_error unless n >= 1,
// 0 < p < 1 and 0 <= t <= p.
double binomial_tail(int n, double p, double t);

// Conditional-entropy floor (1 - mu) log2 |X| - mu / ln 2.
double entropy_lemma_bound(std::size_t alphabet_size, double mu);

// Joint probability table p(x, y): row index x, column index y.
using JointTable = std::vector<std::vector<double>>;

// L1 distance between p(x,y) and the product of uniform-x with p(y):
//   sum_{x,y} | p(x,y) - p(y)/|X| |.
// Throws std::invalid_argument if the table is not normalized.
double l1_uniformity_statistic(const JointTable& joint);

// Exact H(x|y) of a normalized joint table, in bits.
double conditional_entropy(const JointTable& joint);

// Plug-in estimate of H(x|y) from samples. No bias correction is applied;
// the estimate is only meaningful when the number of samples is much larger
// than the number of occupied (x, y) cells, so keep the y alphabet coarse.
double empirical_conditional_entropy(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& samples);

}  // namespace qkd3::analysis
