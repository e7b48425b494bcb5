#include "proofcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <stdexcept>

#include "analysis.hpp"
#include "qcore.hpp"
#include "rng.hpp"

namespace qkd3::proofcheck {

namespace {

using Amp = std::complex<double>;

std::size_t dim_of(std::size_t n) { return std::size_t{1} << (2 * n); }

int digit_at(std::uint64_t word, std::size_t site, std::size_t n) {
    return static_cast<int>((word >> (2 * (n - 1 - site))) & 3u);
}

Vector pair_ket_vector(const qcore::PairState& s) {
    Vector v(4);
    for (int k = 0; k < 4; ++k) v(k) = s.amps[k];
    return v;
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

Vector kron_vec(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) out(i * b.size() + j) = a(i) * b(j);
    return out;
}

}  // namespace

void TinyInstance::check_structural() const {
    if (n < 1 || n > MAX_PAIRS)
        throw std::invalid_argument("TinyInstance: need 1 <= n <= 5 (4^n <= 1024)");
    if (s > n) throw std::invalid_argument("TinyInstance: need s <= n");
    if (r > s) throw std::invalid_argument("TinyInstance: need r <= s");
    if (!(d_k > 0.0)) throw std::invalid_argument("TinyInstance: need d_k > 0");
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("TinyInstance: need 0 <= eps < 1");
}

std::string TinyInstance::describe() const {
    std::ostringstream out;
    out << "n=" << n << " s=" << s << " r=" << r << " eps=" << eps << " tau=" << tau
        << " d_k=" << d_k;
    return out.str();
}

Matrix bell_basis_matrix(bool perturb_sign) {
    Matrix b(4, 4);
    for (int j = 0; j < 4; ++j) {
        const qcore::PairState ket = qcore::bell_ket(j);
        for (int k = 0; k < 4; ++k) b(k, j) = ket.amps[k];
    }
    if (perturb_sign) b(3, 3) = -b(3, 3);
    return b;
}

Matrix x_site(const Matrix& bell) {
    Matrix x = Matrix::Zero(4, 4);
    for (int j = 0; j < 4; ++j)
        x += (j == 0 ? 1.0 : 1.0 / 3.0) * projector(bell.col(j));
    return x;
}

Matrix y_site(const Matrix& bell) {
    Matrix y = Matrix::Zero(4, 4);
    for (int j = 1; j < 4; ++j) y += (2.0 / 3.0) * projector(bell.col(j));
    return y;
}

Matrix outcome_projector(int a, int b, int alpha, int beta) {
    const qcore::PairState s =
        qcore::product_pair(qcore::basis_ket(a, alpha), qcore::basis_ket(b, beta));
    return projector(pair_ket_vector(s));
}

Matrix anticorrelated_projector(int a) {
    return outcome_projector(a, a, 0, 1) + outcome_projector(a, a, 1, 0);
}

Matrix correlated_projector(int a) {
    return outcome_projector(a, a, 0, 0) + outcome_projector(a, a, 1, 1);
}

Matrix x_site_from_bases() {
    Matrix x = Matrix::Zero(4, 4);
    for (int a = 0; a < 3; ++a) x += anticorrelated_projector(a);
    return x / 3.0;
}

Matrix y_site_from_bases() {
    Matrix y = Matrix::Zero(4, 4);
    for (int a = 0; a < 3; ++a) y += correlated_projector(a);
    return y / 3.0;
}

Matrix kron_sites(const std::vector<Matrix>& sites) {
    const std::size_t n = sites.size();
    const std::size_t dim = dim_of(n);
    Matrix m(dim, dim);
    for (std::size_t row = 0; row < dim; ++row) {
        for (std::size_t col = 0; col < dim; ++col) {
            Amp v{1.0, 0.0};
            for (std::size_t i = 0; i < n && v != Amp{0.0, 0.0}; ++i)
                v *= sites[i](digit_at(row, i, n), digit_at(col, i, n));
            m(row, col) = v;
        }
    }
    return m;
}

void conjugate_site(Matrix& m, const Matrix& a4, std::size_t site, std::size_t n) {
    const std::size_t dim = dim_of(n);
    const std::size_t stride = std::size_t{1} << (2 * (n - 1 - site));
    const std::size_t outer = dim / (4 * stride);
    // rows: m <- (site A)^dag m
    for (Eigen::Index col = 0; col < static_cast<Eigen::Index>(dim); ++col) {
        for (std::size_t hi = 0; hi < outer; ++hi) {
            for (std::size_t lo = 0; lo < stride; ++lo) {
                const std::size_t base = hi * 4 * stride + lo;
                Amp x[4];
                for (int b = 0; b < 4; ++b) x[b] = m(base + b * stride, col);
                for (int a = 0; a < 4; ++a) {
                    Amp acc{0.0, 0.0};
                    for (int b = 0; b < 4; ++b) acc += std::conj(a4(b, a)) * x[b];
                    m(base + a * stride, col) = acc;
                }
            }
        }
    }
    // columns: m <- m (site A)
    for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(dim); ++row) {
        for (std::size_t hi = 0; hi < outer; ++hi) {
            for (std::size_t lo = 0; lo < stride; ++lo) {
                const std::size_t base = hi * 4 * stride + lo;
                Amp x[4];
                for (int b = 0; b < 4; ++b) x[b] = m(row, base + b * stride);
                for (int a = 0; a < 4; ++a) {
                    Amp acc{0.0, 0.0};
                    for (int b = 0; b < 4; ++b) acc += x[b] * a4(b, a);
                    m(row, base + a * stride) = acc;
                }
            }
        }
    }
}

std::size_t bell_weight_on(std::uint64_t word, const std::vector<std::size_t>& r_sites,
                           std::size_t n) {
    std::size_t w = 0;
    for (std::size_t site : r_sites)
        if (digit_at(word, site, n) != 0) ++w;
    return w;
}

Pattern make_pattern(const TinyInstance& inst, const std::vector<int>& d,
                     const std::vector<int>& e) {
    if (d.size() != inst.n) throw std::invalid_argument("make_pattern: d must have length n");
    if (e.size() != inst.s) throw std::invalid_argument("make_pattern: e must have length s");
    Pattern pat;
    pat.d = d;
    pat.e = e;
    for (std::size_t i = 0; i < inst.n && pat.s_set.size() < inst.s; ++i)
        if (d[i] == 0) pat.s_set.push_back(i);
    if (pat.s_set.size() < inst.s)
        throw std::invalid_argument("make_pattern: w0(d) < s");
    std::size_t err = 0;
    for (std::size_t pos = 0; pos < inst.s; ++pos) {
        if (e[pos]) {
            pat.e_set.push_back(pat.s_set[pos]);
            ++err;
        }
    }
    if (inst.s > 0 && !(static_cast<double>(err) < inst.eps * static_cast<double>(inst.s)))
        throw std::invalid_argument("make_pattern: w(e) >= eps*s, announcement fails validation");
    for (std::size_t pos = 0; pos < inst.s; ++pos) {
        if (e[pos]) continue;
        if (pat.r_set.size() < inst.r) pat.r_set.push_back(pat.s_set[pos]);
        else pat.t_set.push_back(pat.s_set[pos]);
    }
    if (pat.r_set.size() < inst.r)
        throw std::invalid_argument("make_pattern: fewer than r error-free positions");
    return pat;
}

namespace {

enum class SiteRole { Outside, Error, Leftover, Reconciled };

std::vector<SiteRole> site_roles(const TinyInstance& inst, const Pattern& pat) {
    std::vector<SiteRole> roles(inst.n, SiteRole::Outside);
    for (std::size_t i : pat.e_set) roles[i] = SiteRole::Error;
    for (std::size_t i : pat.t_set) roles[i] = SiteRole::Leftover;
    for (std::size_t i : pat.r_set) roles[i] = SiteRole::Reconciled;
    return roles;
}

double pr_d(std::size_t n) { return std::pow(3.0, -static_cast<double>(n)); }

}  // namespace

Matrix sum_fp_closed(const TinyInstance& inst, const Pattern& pat, const Matrix& bell) {
    const Matrix x = x_site(bell);
    const Matrix y = y_site(bell);
    const std::vector<SiteRole> roles = site_roles(inst, pat);
    std::vector<Matrix> sites;
    sites.reserve(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) {
        switch (roles[i]) {
            case SiteRole::Outside: sites.push_back(Matrix::Identity(4, 4)); break;
            case SiteRole::Error: sites.push_back(y); break;
            default: sites.push_back(x); break;
        }
    }
    return pr_d(inst.n) * kron_sites(sites);
}

Matrix fp_single(const TinyInstance& inst, const Pattern& pat, const std::vector<int>& a) {
    if (a.size() != inst.n) throw std::invalid_argument("fp_single: a must have length n");
    const std::vector<SiteRole> roles = site_roles(inst, pat);
    std::vector<Matrix> sites;
    sites.reserve(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) {
        switch (roles[i]) {
            case SiteRole::Outside: {
                const int b = (a[i] + pat.d[i]) % 3;
                Matrix sum = Matrix::Zero(4, 4);
                for (int alpha = 0; alpha < 2; ++alpha)
                    for (int beta = 0; beta < 2; ++beta) sum += outcome_projector(a[i], b, alpha, beta);
                sites.push_back(sum);
                break;
            }
            case SiteRole::Error: sites.push_back(correlated_projector(a[i])); break;
            default: sites.push_back(anticorrelated_projector(a[i])); break;
        }
    }
    return pr_d(inst.n) * pr_d(inst.n) * kron_sites(sites);
}

Matrix sum_fp_explicit(const TinyInstance& inst, const Pattern& pat) {
    const std::size_t dim = dim_of(inst.n);
    Matrix total = Matrix::Zero(dim, dim);
    std::vector<int> a(inst.n, 0);
    const std::size_t count = static_cast<std::size_t>(std::pow(3.0, inst.n));
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rem = idx;
        for (std::size_t i = 0; i < inst.n; ++i) {
            a[i] = static_cast<int>(rem % 3);
            rem /= 3;
        }
        total += fp_single(inst, pat, a);
    }
    return total;
}

Matrix fpk_single(const TinyInstance& inst, const Pattern& pat, const std::vector<int>& a,
                  const gf2::PrivacyMatrix& k, const gf2::BitVector& kappa) {
    if (k.num_cols() != inst.r) throw std::invalid_argument("fpk_single: K has wrong column count");
    if (kappa.size() != k.num_rows()) throw std::invalid_argument("fpk_single: kappa has wrong length");
    const std::vector<SiteRole> roles = site_roles(inst, pat);
    const std::size_t dim = dim_of(inst.n);
    Matrix total = Matrix::Zero(dim, dim);

    std::vector<Matrix> sites(inst.n, Matrix::Identity(4, 4));
    for (std::size_t i = 0; i < inst.n; ++i) {
        switch (roles[i]) {
            case SiteRole::Outside: {
                const int b = (a[i] + pat.d[i]) % 3;
                Matrix sum = Matrix::Zero(4, 4);
                for (int alpha = 0; alpha < 2; ++alpha)
                    for (int beta = 0; beta < 2; ++beta) sum += outcome_projector(a[i], b, alpha, beta);
                sites[i] = sum;
                break;
            }
            case SiteRole::Error: sites[i] = correlated_projector(a[i]); break;
            case SiteRole::Leftover: sites[i] = anticorrelated_projector(a[i]); break;
            case SiteRole::Reconciled: break;  // filled per alpha_R below
        }
    }

    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << inst.r); ++bits) {
        gf2::BitVector alpha_r(inst.r);
        for (std::size_t j = 0; j < inst.r; ++j) alpha_r.set(j, (bits >> j) & 1u);
        if (!(gf2::apply_key_map(k, alpha_r) == kappa)) continue;
        for (std::size_t j = 0; j < inst.r; ++j) {
            const std::size_t site = pat.r_set[j];
            const int alpha = alpha_r.get(j);
            sites[site] = outcome_projector(a[site], a[site], alpha, 1 - alpha);
        }
        total += kron_sites(sites);
    }
    return pr_d(inst.n) * pr_d(inst.n) * total;
}

Matrix projector_pi_r(const std::vector<std::size_t>& r_sites, double d_k, std::size_t n,
                      const Matrix& bell) {
    const std::size_t dim = dim_of(n);
    Matrix pi = Matrix::Zero(dim, dim);
    for (std::size_t word = 0; word < dim; ++word)
        if (static_cast<double>(bell_weight_on(word, r_sites, n)) >= d_k / 2.0)
            pi(word, word) = 1.0;
    // conjugate the Bell-word mask into computational coordinates
    const Matrix badj = bell.adjoint();
    for (std::size_t site = 0; site < n; ++site) conjugate_site(pi, badj, site, n);
    return pi;
}

namespace {

// all announcements (d, e) with w0(d) >= s and w(e) < eps*s
std::vector<Pattern> enumerate_patterns(const TinyInstance& inst) {
    std::vector<Pattern> pats;
    const std::size_t count = static_cast<std::size_t>(std::pow(3.0, inst.n));
    std::vector<int> d(inst.n), e(inst.s);
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rem = idx;
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < inst.n; ++i) {
            d[i] = static_cast<int>(rem % 3);
            rem /= 3;
            if (d[i] == 0) ++zeros;
        }
        if (zeros < inst.s) continue;
        for (std::uint64_t ebits = 0; ebits < (std::uint64_t{1} << inst.s); ++ebits) {
            const std::size_t w = static_cast<std::size_t>(std::popcount(ebits));
            if (!(static_cast<double>(w) < inst.eps * static_cast<double>(inst.s))) continue;
            for (std::size_t pos = 0; pos < inst.s; ++pos) e[pos] = (ebits >> pos) & 1u;
            // skip announcements without r error-free sifted positions; they
            // cannot yield a reconciled set
            if (inst.s - w < inst.r) continue;
            pats.push_back(make_pattern(inst, d, e));
        }
    }
    return pats;
}

}  // namespace

SpectralBoundResult certify_spectral_bound(const TinyInstance& inst, const Matrix& bell) {
    inst.check_structural();
    if (inst.s < 1 || inst.r < 1)
        throw std::invalid_argument("certify_spectral_bound: the bound requires s >= 1 and r >= 1");
    if (!(inst.eps < 0.25))
        throw std::invalid_argument("certify_spectral_bound: the bound requires eps < 1/4");
    const double tau_cap = 1.0 - inst.eps / (1.0 - inst.eps);
    if (!(inst.tau > 0.0 && inst.tau < tau_cap))
        throw std::invalid_argument("certify_spectral_bound: tau out of range");
    const double d_k_expected = (inst.eps / (1.0 - inst.eps) + inst.tau) * static_cast<double>(inst.r);
    if (std::abs(inst.d_k - d_k_expected) > 1e-9)
        throw std::invalid_argument("certify_spectral_bound: d_k must equal (eps/(1-eps)+tau) r");

    const std::size_t n = inst.n;
    const std::size_t dim = dim_of(n);
    const double theta = analysis::theta(static_cast<double>(inst.r), inst.tau);
    const double prd = pr_d(n);

    SpectralBoundResult res;
    res.theta_bound = theta;
    res.setup_relation_holds =
        static_cast<double>(inst.r) >= (1.0 - inst.eps) * static_cast<double>(inst.s);

    // Route 1: diagonal arithmetic in the Bell word basis.
    static const double XEIG[4] = {1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    static const double YEIG[4] = {0.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
    const std::vector<Pattern> pats = enumerate_patterns(inst);
    res.term_count = pats.size();

    std::vector<double> diag_direct(dim, 0.0);
    std::map<std::vector<int>, std::vector<double>> diag_by_d;
    for (const Pattern& pat : pats) {
        const std::vector<SiteRole> roles = site_roles(inst, pat);
        std::vector<double>& dd = diag_by_d.try_emplace(pat.d, dim, 0.0).first->second;
        for (std::size_t word = 0; word < dim; ++word) {
            if (static_cast<double>(bell_weight_on(word, pat.r_set, n)) < inst.d_k / 2.0) continue;
            double v = prd;
            for (std::size_t i = 0; i < n && v != 0.0; ++i) {
                const int c = digit_at(word, i, n);
                if (roles[i] == SiteRole::Error) v *= YEIG[c];
                else if (roles[i] != SiteRole::Outside) v *= XEIG[c];
            }
            diag_direct[word] += v;
            dd[word] += v;
        }
    }
    res.per_d_margin = -1.0;
    for (const auto& [d, dd] : diag_by_d)
        for (double v : dd) res.per_d_margin = std::max(res.per_d_margin, v - prd * theta);

    // Route 2: dense operators from measurement-basis projectors, grouped by
    // reconciled set so the Pi_R sandwich is applied once per group.
    std::map<std::vector<std::size_t>, Matrix> groups;
    const bool explicit_route = n <= 3;
    const Matrix xb = x_site_from_bases();
    const Matrix yb = y_site_from_bases();
    for (const Pattern& pat : pats) {
        Matrix term;
        if (explicit_route) {
            term = sum_fp_explicit(inst, pat);
        } else {
            const std::vector<SiteRole> roles = site_roles(inst, pat);
            std::vector<Matrix> sites;
            sites.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (roles[i] == SiteRole::Outside) sites.push_back(Matrix::Identity(4, 4));
                else if (roles[i] == SiteRole::Error) sites.push_back(yb);
                else sites.push_back(xb);
            }
            term = prd * kron_sites(sites);
        }
        auto [it, fresh] = groups.try_emplace(pat.r_set, Matrix::Zero(dim, dim));
        it->second += term;
    }

    Matrix total_bell = Matrix::Zero(dim, dim);
    for (auto& [r_sites, m] : groups) {
        for (std::size_t site = 0; site < n; ++site) conjugate_site(m, bell, site, n);
        // the Pi_R sandwich is an exact 0/1 mask on Bell words
        for (std::size_t word = 0; word < dim; ++word) {
            if (static_cast<double>(bell_weight_on(word, r_sites, n)) >= inst.d_k / 2.0) continue;
            m.row(word).setZero();
            m.col(word).setZero();
        }
        total_bell += m;
    }

    res.offdiag_residual = 0.0;
    res.route_residual = 0.0;
    res.max_eigenvalue = 0.0;
    for (std::size_t row = 0; row < dim; ++row) {
        for (std::size_t col = 0; col < dim; ++col) {
            if (row == col) continue;
            res.offdiag_residual = std::max(res.offdiag_residual, std::abs(total_bell(row, col)));
        }
        const Amp diag = total_bell(row, row);
        res.offdiag_residual = std::max(res.offdiag_residual, std::abs(diag.imag()));
        res.route_residual = std::max(res.route_residual, std::abs(diag.real() - diag_direct[row]));
        res.max_eigenvalue = std::max(res.max_eigenvalue, diag.real());
    }

    if (n <= 3) {
        // independent eigensolve of the dense operator in computational coordinates
        Matrix total_comp = total_bell;
        const Matrix badj = bell.adjoint();
        for (std::size_t site = 0; site < n; ++site) conjugate_site(total_comp, badj, site, n);
        Eigen::SelfAdjointEigenSolver<Matrix> solver(total_comp);
        const double max_eig = solver.eigenvalues().maxCoeff();
        res.eig_residual = std::abs(max_eig - res.max_eigenvalue);
    }

    res.pass = res.offdiag_residual < STRUCT_TOL && res.route_residual < STRUCT_TOL &&
               res.max_eigenvalue <= theta + STRUCT_TOL && res.per_d_margin <= STRUCT_TOL &&
               (!res.eig_residual || *res.eig_residual < PSD_TOL);
    return res;
}

double verify_scalar_identity_site(const Matrix& bell) {
    double dev = 0.0;
    const Amp minus_i{0.0, -1.0};
    for (int a = 0; a < 3; ++a) {
        for (int alpha = 0; alpha < 2; ++alpha) {
            for (int gamma = 0; gamma < 2; ++gamma) {
                const int c = gamma == 0 ? 0 : a + 1;
                const qcore::PairState outcome =
                    qcore::product_pair(qcore::basis_ket(a, alpha), qcore::basis_ket(a, 1 - alpha));
                const Vector bra = pair_ket_vector(outcome);
                Amp lhs{0.0, 0.0};
                for (int kk = 0; kk < 4; ++kk) lhs += std::conj(bra(kk)) * bell(kk, c);
                Amp rhs{1.0, 0.0};
                if (alpha * (1 - gamma)) rhs = -rhs;
                if (a == 2 && gamma) rhs *= minus_i;
                rhs /= std::sqrt(2.0);
                dev = std::max(dev, std::abs(lhs - rhs));
            }
        }
    }
    return dev;
}

double verify_scalar_identity(std::size_t max_r, std::size_t trials, std::uint64_t seed) {
    if (max_r < 1 || max_r > 6) throw std::invalid_argument("verify_scalar_identity: need 1 <= r <= 6");
    RngStream rng(mix_key(seed, 100, 0));
    const Matrix bell = bell_basis_matrix();
    double dev = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t r = 1 + rng.next_below(static_cast<std::uint32_t>(max_r));
        Vector outcome = Vector::Ones(1);
        Vector word = Vector::Ones(1);
        int sign_exp = 0;
        int i_exp = 0;
        for (std::size_t i = 0; i < r; ++i) {
            const int a = static_cast<int>(rng.next_below(3));
            const int alpha = rng.next_bit();
            const int gamma = rng.next_bit();
            const int c = gamma == 0 ? 0 : a + 1;
            const qcore::PairState site =
                qcore::product_pair(qcore::basis_ket(a, alpha), qcore::basis_ket(a, 1 - alpha));
            outcome = kron_vec(outcome, pair_ket_vector(site));
            word = kron_vec(word, Vector(bell.col(c)));
            sign_exp += alpha * (1 - gamma);
            if (a == 2) i_exp += gamma;
        }
        const Amp lhs = outcome.adjoint() * word;
        Amp rhs = std::pow(Amp{0.0, -1.0}, i_exp) / std::pow(std::sqrt(2.0), static_cast<double>(r));
        if (sign_exp % 2) rhs = -rhs;
        dev = std::max(dev, std::abs(lhs - rhs));
    }
    return dev;
}

bool verify_pa_sum_identity(const gf2::PrivacyMatrix& k) {
    const std::size_t m = k.num_rows();
    const std::size_t r = k.num_cols();
    if (m > 4 || r > 10)
        throw std::invalid_argument("verify_pa_sum_identity: need m <= 4 and r <= 10");
    if (gf2::matrix_rank(k) != static_cast<int>(m))
        throw std::invalid_argument("verify_pa_sum_identity: K must be full rank");

    // rows as bitmasks, plus row-echelon form for membership tests
    std::vector<std::uint32_t> rows(m, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < r; ++j)
            if (k.rows[i].get(j)) rows[i] |= (1u << j);
    std::vector<std::uint32_t> echelon = rows;
    std::vector<int> pivot(m, -1);
    {
        std::size_t row = 0;
        for (std::size_t col = 0; col < r && row < m; ++col) {
            std::size_t p = row;
            while (p < m && !((echelon[p] >> col) & 1u)) ++p;
            if (p == m) continue;
            std::swap(echelon[row], echelon[p]);
            for (std::size_t i = 0; i < m; ++i)
                if (i != row && ((echelon[i] >> col) & 1u)) echelon[i] ^= echelon[row];
            pivot[row] = static_cast<int>(col);
            ++row;
        }
    }
    auto in_rowspace = [&](std::uint32_t g) {
        std::uint32_t v = g;
        for (std::size_t i = 0; i < m; ++i)
            if (pivot[i] >= 0 && ((v >> pivot[i]) & 1u)) v ^= echelon[i];
        return v == 0;
    };

    // group alpha by its key
    const std::uint32_t num_alpha = 1u << r;
    const std::uint32_t num_kappa = 1u << m;
    std::vector<std::vector<std::uint32_t>> fibers(num_kappa);
    for (std::uint32_t alpha = 0; alpha < num_alpha; ++alpha) {
        std::uint32_t kappa = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (std::popcount(rows[i] & alpha) & 1) kappa |= (1u << i);
        fibers[kappa].push_back(alpha);
    }

    for (std::uint32_t kappa = 0; kappa < num_kappa; ++kappa) {
        if (fibers[kappa].empty()) return false;  // full rank makes every key reachable
        const std::uint32_t theta_kappa = fibers[kappa].front();
        for (std::uint32_t g = 0; g < num_alpha; ++g) {
            long long sum = 0;
            for (std::uint32_t alpha : fibers[kappa])
                sum += (std::popcount(alpha & g) & 1) ? -1 : 1;
            long long expected = 0;
            if (in_rowspace(g)) {
                expected = static_cast<long long>(1) << (r - m);
                if (std::popcount(theta_kappa & g) & 1) expected = -expected;
            }
            if (sum != expected) return false;
        }
    }
    return true;
}

}  // namespace qkd3::proofcheck
