#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "analysis.hpp"
#include "rng.hpp"

using namespace qkd3;

TEST_CASE("theta decay factor") {
    CHECK(analysis::theta(100.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-12));
    // tau^3 r / 16 = 0.125 * 128 / 16 = 1
    CHECK(analysis::theta(128.0, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    double prev = 2.0;
    for (double r = 0.0; r < 500.0; r += 50.0) {
        const double v = analysis::theta(r, 0.3);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(analysis::theta(-1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(analysis::theta(10.0, 0.0), std::domain_error);
}

TEST_CASE("entropy lower bound") {
    // large r drives theta to zero and the bound to m
    CHECK(analysis::entropy_lower_bound(100.0, 1e9, 0.5) == doctest::Approx(100.0).epsilon(1e-9));
    // frozen from a 30-digit evaluation at m=100, r=1e4, tau=0.2
    CHECK(analysis::entropy_lower_bound(100.0, 1e4, 0.2) ==
          doctest::Approx(65.3252750633964).epsilon(1e-10));
    for (double r : {1.0, 10.0, 100.0, 1000.0})
        CHECK(analysis::entropy_lower_bound(64.0, r, 0.3) <= 64.0);
    // vacuous (negative) at small r, returned unchanged
    CHECK(analysis::entropy_lower_bound(8.0, 1.0, 0.1) < 0.0);
}

TEST_CASE("net gain formulas") {
    CHECK(analysis::net_gain_three_basis(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(analysis::net_gain_two_basis(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    // frozen from 30-digit evaluations
    CHECK(analysis::net_gain_three_basis(0.1) == doctest::Approx(0.169350355750473).epsilon(1e-12));
    CHECK(analysis::net_gain_two_basis(0.05) == doctest::Approx(0.401057269906020).epsilon(1e-12));

    CHECK(analysis::net_gain_three_basis(0.12) > 0.0);
    CHECK(analysis::net_gain_three_basis(0.13) < 0.0);
    CHECK(analysis::net_gain_two_basis(0.09) > 0.0);
    CHECK(analysis::net_gain_two_basis(0.10) < 0.0);

    CHECK_THROWS_AS(analysis::net_gain_three_basis(0.25), std::domain_error);
    CHECK_THROWS_AS(analysis::net_gain_three_basis(-0.01), std::domain_error);
    CHECK_THROWS_AS(analysis::net_gain_two_basis(0.4), std::domain_error);
}

TEST_CASE("threshold bisection") {
    const double e3 = analysis::solve_threshold(analysis::net_gain_three_basis, 1e-3, 0.2, 1e-6);
    const double e2 = analysis::solve_threshold(analysis::net_gain_two_basis, 1e-3, 0.2, 1e-6);
    CHECK(e3 > 0.123);
    CHECK(e3 < 0.129);
    CHECK(e2 > 0.094);
    CHECK(e2 < 0.100);
    CHECK(e3 > e2);
    // sign brackets the root within tol
    CHECK(analysis::net_gain_three_basis(e3 - 2e-6) > 0.0);
    CHECK(analysis::net_gain_three_basis(e3 + 2e-6) < 0.0);

    CHECK_THROWS_AS(analysis::solve_threshold([](double) { return 1.0; }, 0.0, 1.0, 1e-6),
                    std::invalid_argument);
}

TEST_CASE("key rate report grid") {
    const auto rep = analysis::key_rate_report(0.01, 0.2, 0.01);
    REQUIRE(rep.eps_grid.size() == 20);
    for (std::size_t i = 0; i < rep.eps_grid.size(); ++i) CHECK(rep.gain3[i] > rep.gain2[i]);
    CHECK(rep.threshold3 > rep.threshold2);
}

TEST_CASE("binomial tail") {
    // independent oracle: integer enumeration of C(10,k) for k < 3
    long long acc = 0, binom = 1;
    for (int k = 0; k < 3; ++k) {
        acc += binom;
        binom = binom * (10 - k) / (k + 1);
    }
    CHECK(acc == 56);
    CHECK(analysis::binomial_tail(10, 0.5, 0.2) ==
          doctest::Approx(static_cast<double>(acc) / 1024.0).epsilon(1e-12));

    CHECK(analysis::binomial_tail(7, 0.3, 0.3) == 0.0);  // t = p, empty sum
    CHECK_THROWS_AS(analysis::binomial_tail(0, 0.5, 0.1), std::domain_error);
    CHECK_THROWS_AS(analysis::binomial_tail(5, 1.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(analysis::binomial_tail(5, 0.5, 0.6), std::domain_error);

    // the Hoeffding-style bound on a spot grid (full grid in the acceptance suite)
    for (int n : {1, 7, 23, 60})
        for (double p : {0.2, 0.5, 0.8})
            for (double t : {0.05, 0.15, 0.2})
                CHECK(analysis::binomial_tail(n, p, t) <= std::exp(-2.0 * t * t * n));
}

TEST_CASE("entropy lemma bound") {
    CHECK(analysis::entropy_lemma_bound(8, 0.0) == doctest::Approx(3.0).epsilon(1e-15));
    // frozen: 0.9 * 4 - 0.1 / ln2 = 3.45573049591110
    CHECK(analysis::entropy_lemma_bound(16, 0.1) == doctest::Approx(3.45573049591110).epsilon(1e-12));
    double prev = 100.0;
    for (double mu = 0.0; mu < 1.0; mu += 0.1) {
        const double v = analysis::entropy_lemma_bound(4, mu);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(analysis::entropy_lemma_bound(0, 0.1), std::domain_error);
    CHECK_THROWS_AS(analysis::entropy_lemma_bound(4, -0.1), std::domain_error);
}

TEST_CASE("L1 uniformity statistic") {
    // kappa uniform and independent of v
    analysis::JointTable uniform(2, std::vector<double>(3, 1.0 / 6.0));
    CHECK(analysis::l1_uniformity_statistic(uniform) == doctest::Approx(0.0).epsilon(1e-15));

    // kappa a deterministic copy of v, m = 1
    analysis::JointTable copy = {{0.5, 0.0}, {0.0, 0.5}};
    CHECK(analysis::l1_uniformity_statistic(copy) == doctest::Approx(1.0).epsilon(1e-12));

    analysis::JointTable bad = {{0.5, 0.1}, {0.0, 0.5}};
    CHECK_THROWS_AS(analysis::l1_uniformity_statistic(bad), std::invalid_argument);

    RngStream rng(mix_key(23, 5, 0));
    for (int trial = 0; trial < 200; ++trial) {
        analysis::JointTable t(3, std::vector<double>(4, 0.0));
        double total = 0.0;
        for (auto& row : t)
            for (double& v : row) {
                v = rng.next_double();
                total += v;
            }
        for (auto& row : t)
            for (double& v : row) v /= total;
        const double mu = analysis::l1_uniformity_statistic(t);
        CHECK(mu >= 0.0);
        CHECK(mu <= 2.0);
    }
}

TEST_CASE("conditional entropy, exact and empirical") {
    const analysis::JointTable indep(4, std::vector<double>(2, 1.0 / 8.0));
    CHECK(analysis::conditional_entropy(indep) == doctest::Approx(2.0).epsilon(1e-12));
    const analysis::JointTable copy = {{0.5, 0.0}, {0.0, 0.5}};
    CHECK(analysis::conditional_entropy(copy) == doctest::Approx(0.0).epsilon(1e-12));

    RngStream rng(mix_key(23, 6, 0));
    std::vector<std::pair<std::uint64_t, std::uint64_t>> samples;
    for (int i = 0; i < 200000; ++i)
        samples.emplace_back(rng.next_below(16), rng.next_below(3));
    // kappa uniform on 4 bits, independent of v: plug-in close to 4 from below
    const double h = analysis::empirical_conditional_entropy(samples);
    CHECK(h > 3.99);
    CHECK(h <= 4.0 + 1e-12);

    samples.clear();
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t v = rng.next_below(7);
        samples.emplace_back(v, v);  // kappa = v
    }
    CHECK(analysis::empirical_conditional_entropy(samples) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(analysis::empirical_conditional_entropy({}), std::invalid_argument);
}
