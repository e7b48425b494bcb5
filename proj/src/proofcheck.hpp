#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gf2codes.hpp"

namespace qkd3::proofcheck {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Tolerances: structural identities are exact, 1e-12 absorbs rounding over
// tensor sums; positivity gets extra slack for accumulated error.
inline constexpr double STRUCT_TOL = 1e-12;
inline constexpr double PSD_TOL = 1e-10;

// Small free parameters for desk-scale operator checks. Only structural
// constraints are imposed here (s or r may be zero for operator edge cases);
// the eigenvalue certification additionally requires the protocol-setup
// relations (see certify_spectral_bound).
struct TinyInstance {
    std::size_t n = 1;  // pair count, 4^n <= 1024
    std::size_t s = 1;  // sifted length, <= n
    std::size_t r = 1;  // reconciled length, <= s
    double eps = 0.1;
    double tau = 0.5;
    double d_k = 0.0;

    void check_structural() const;  // throws std::invalid_argument
    std::string describe() const;
};

inline constexpr std::size_t MAX_PAIRS = 5;  // 4^5 = 1024

// 4x4 matrix whose columns are the Bell kets. `perturb_sign` flips one
// amplitude sign; the verification harness uses it to prove it can fail.
Matrix bell_basis_matrix(bool perturb_sign = false);

// Site operators, diagonal in the Bell basis:
//   X = |B0><B0| + (1/3) sum_{j>=1} |Bj><Bj|
//   Y = (2/3) sum_{j>=1} |Bj><Bj|
Matrix x_site(const Matrix& bell);
Matrix y_site(const Matrix& bell);

// The same operators assembled from measurement-basis projectors:
//   X = (1/3) sum_a sum_alpha |alpha_a, !alpha_a><...|
//   Y = (1/3) sum_a sum_alpha |alpha_a,  alpha_a><...|
// An independent route: these never touch the Bell kets.
Matrix x_site_from_bases();
Matrix y_site_from_bases();

// sum_alpha |alpha_a, beta(alpha)_b><...| for one pair, from basis kets.
Matrix anticorrelated_projector(int a);            // beta = !alpha, common basis
Matrix correlated_projector(int a);                // beta = alpha, common basis
Matrix outcome_projector(int a, int b, int alpha, int beta);

// Kronecker product of per-site 4x4 operators, site 0 most significant.
Matrix kron_sites(const std::vector<Matrix>& sites);

// In-place basis change on one site: m <- (I..A..I)^dag m (I..A..I).
void conjugate_site(Matrix& m, const Matrix& a4, std::size_t site, std::size_t n);

// Bell weight w(c_R): number of nonzero base-4 digits of `word` at R sites.
std::size_t bell_weight_on(std::uint64_t word, const std::vector<std::size_t>& r_sites,
                           std::size_t n);

// Sifting/partition pattern implied by announcement (d, e).
struct Pattern {
    std::vector<int> d;             // in {0,1,2}^n
    std::vector<int> e;             // in {0,1}^s
    std::vector<std::size_t> s_set; // sifted sites (0-indexed), first s zeros of d
    std::vector<std::size_t> e_set; // error sites
    std::vector<std::size_t> r_set; // first r of S \ E
    std::vector<std::size_t> t_set; // rest of S
};

// Builds the pattern; requires w0(d) >= s and w(e) < eps*s.
Pattern make_pattern(const TinyInstance& inst, const std::vector<int>& d,
                     const std::vector<int>& e);

// Closed form: sum_a F_P = (1/3^n) 1_{S-bar} (x) Y_E (x) X_T (x) X_R.
Matrix sum_fp_closed(const TinyInstance& inst, const Pattern& pat, const Matrix& bell);

// The same operator by explicit summation of F_P over all 3^n basis vectors,
// every factor assembled from measurement-basis projectors.
Matrix sum_fp_explicit(const TinyInstance& inst, const Pattern& pat);

// F_P for a single announced basis vector a.
Matrix fp_single(const TinyInstance& inst, const Pattern& pat, const std::vector<int>& a);

// F_{P,kappa}: the reconciled block keeps only alpha_R with K alpha_R = kappa.
Matrix fpk_single(const TinyInstance& inst, const Pattern& pat, const std::vector<int>& a,
                  const gf2::PrivacyMatrix& k, const gf2::BitVector& kappa);

// Projector onto Bell words with w(c_R) >= d_k / 2.
Matrix projector_pi_r(const std::vector<std::size_t>& r_sites, double d_k, std::size_t n,
                      const Matrix& bell);

struct SpectralBoundResult {
    double max_eigenvalue = 0.0;      // max Bell-diagonal entry of the sum
    double theta_bound = 0.0;         // theta(r)
    double offdiag_residual = 0.0;    // Bell-basis off-diagonal magnitude
    double route_residual = 0.0;      // dense route vs direct diagonal route
    double per_d_margin = 0.0;        // max over (d, word) of entry - pr_d*theta
    std::optional<double> eig_residual;  // dense eigensolve vs diagonal (n <= 3)
    std::size_t term_count = 0;       // admissible (d, e) announcements
    bool setup_relation_holds = false;  // r >= s(1-eps); the theta bound presumes it
    bool pass = false;
};

// Enumerates every announcement in the validation-passing set, assembles
// sum_P Pi_R F_P Pi_R along two independent routes, and checks the
// eigenvalue bound theta(r) together with Bell diagonality.
SpectralBoundResult certify_spectral_bound(const TinyInstance& inst, const Matrix& bell);

// Exhaustive check of the single-site overlap closed form
//   <alpha_a, !alpha_a | B_c> = (-1)^(alpha * !gamma) (-i)^([a=2] gamma) / sqrt2
// over all 12 (a, alpha, gamma) cases; returns the max deviation.
double verify_scalar_identity_site(const Matrix& bell);

// Random multi-site version at 1 <= r <= max_r: tensor-product inner product
// against the closed form; returns max deviation over `trials` draws.
double verify_scalar_identity(std::size_t max_r, std::size_t trials, std::uint64_t seed);

// Character-sum identity over the row space of K:
//   sum_{alpha : K alpha = kappa} (-1)^(alpha . g)
//     = (-1)^(theta_kappa . g) 2^(r-m)  if g in rowspace, else 0.
// Exhaustive over all (kappa, g); K must be full rank, r <= 10, m <= 4.
bool verify_pa_sum_identity(const gf2::PrivacyMatrix& k);

}  // namespace qkd3::proofcheck
