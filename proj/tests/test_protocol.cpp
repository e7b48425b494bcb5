#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "analysis.hpp"
#include "protocol.hpp"
#include "serialize.hpp"

using namespace qkd3;

namespace {

protocol::ProtocolParams small_params() { return protocol::derive_params(4, 0.05, 0.1, 0.05); }

gf2::PrivacyMatrix matrix_for(const protocol::ProtocolParams& p, std::uint64_t seed = 42) {
    RngStream rng = make_stream(seed, RngPhase::MatrixSearch, 0);
    auto res = gf2::find_privacy_matrix(p.m, p.r, p.d_k, 50000, rng);
    REQUIRE(res.matrix.has_value());
    return *res.matrix;
}

// rebuild S, E, R, T from the public announcement plus Alice's bits
void replay_announcement(const protocol::SessionRecord& rec) {
    const auto& p = rec.params;
    std::vector<std::size_t> s_set;
    for (std::size_t i = 0; i < p.n && s_set.size() < p.s; ++i)
        if (rec.announcement.d[i] == 0) s_set.push_back(i + 1);
    REQUIRE(s_set == rec.sifted_set);
    REQUIRE(rec.announcement.e.has_value());
    std::vector<std::size_t> e_set;
    for (std::size_t pos = 0; pos < p.s; ++pos)
        if (rec.announcement.e->get(pos)) e_set.push_back(s_set[pos]);
    CHECK(e_set == rec.error_set);
    if (!rec.validation_passed) return;
    const auto part = protocol::partition_reconciled(s_set, e_set, p.r);
    CHECK(part.reconciled == rec.reconciled_set);
    CHECK(part.leftover == rec.leftover_set);
}

}  // namespace

TEST_CASE("derive_params reproduces the setup formulas") {
    const auto p = protocol::derive_params(100, 0.05, 0.1, 0.05);
    CHECK(p.r == 164);
    CHECK(p.s == 172);
    CHECK(p.n == 615);
    CHECK(p.d_k == doctest::Approx(25.0315789473684).epsilon(1e-12));

    // rate bound tends to 1, so r tends to m
    const auto tight = protocol::derive_params(50, 0.0, 1e-15, 0.1);
    CHECK(tight.r == 50);

    for (std::uint32_t m : {1u, 5u, 40u, 333u}) {
        const auto q = protocol::derive_params(m, 0.08, 0.2, 0.02);
        CHECK(q.s >= q.r);
        CHECK(q.m <= q.r);
        CHECK(static_cast<double>(q.m) / q.r <= gf2::shannon_rate_bound(0.08, 0.2) + 1e-12);
        // minimality of r
        CHECK(static_cast<double>(q.m) / (q.r - 1) > gf2::shannon_rate_bound(0.08, 0.2));
    }

    CHECK_THROWS_WITH_AS(protocol::derive_params(8, 0.25, 0.1, 0.05),
                         doctest::Contains("eps < 1/4"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(protocol::derive_params(8, 0.2, 0.8, 0.05),
                         doctest::Contains("eps/(1-eps) + tau < 1"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(protocol::derive_params(8, 0.05, 0.1, 0.4),
                         doctest::Contains("tau_s"), std::invalid_argument);
    CHECK_THROWS_AS(protocol::derive_params(0, 0.05, 0.1, 0.05), std::invalid_argument);
}

TEST_CASE("sift") {
    const auto res = protocol::sift({0, 1, 2, 1}, {0, 2, 2, 1}, 2);
    CHECK(!res.failed);
    CHECK(res.d == std::vector<int>{0, 1, 0, 0});
    CHECK(res.sifted == std::vector<std::size_t>{1, 3});

    const auto all = protocol::sift({0, 1, 2}, {0, 1, 2}, 3);
    CHECK(!all.failed);
    CHECK(all.sifted == std::vector<std::size_t>{1, 2, 3});

    const auto fail = protocol::sift({0, 0}, {1, 2}, 1);
    CHECK(fail.failed);
    CHECK(fail.d == std::vector<int>{1, 2});

    CHECK_THROWS_AS(protocol::sift({0}, {0, 1}, 1), std::invalid_argument);
}

TEST_CASE("detect_errors uses the anticorrelation convention") {
    const auto det = protocol::detect_errors({0, 1}, {1, 1});
    CHECK(det.e.get(0) == 0);
    CHECK(det.e.get(1) == 1);

    const auto none = protocol::detect_errors({0, 1, 0}, {1, 0, 1});
    CHECK(none.e.weight() == 0);
    const auto all = protocol::detect_errors({0, 1, 0}, {0, 1, 0});
    CHECK(all.e.weight() == 3);
}

TEST_CASE("validation threshold is strict") {
    CHECK(!protocol::validate(1, 10, 0.05));  // 1 >= 0.5
    CHECK(protocol::validate(0, 10, 0.05));
    CHECK(protocol::validate(2, 100, 0.05));  // 2 < 5
    CHECK(!protocol::validate(5, 100, 0.05)); // 5 >= 5
}

TEST_CASE("partition_reconciled") {
    const auto part = protocol::partition_reconciled({1, 2, 3, 4}, {2}, 2);
    CHECK(part.reconciled == std::vector<std::size_t>{1, 3});
    CHECK(part.leftover == std::vector<std::size_t>{4});

    const auto full = protocol::partition_reconciled({1, 2, 3}, {}, 3);
    CHECK(full.leftover.empty());

    CHECK_THROWS_AS(protocol::partition_reconciled({1, 2}, {1}, 2), std::logic_error);
}

TEST_CASE("reconciliation cost accounting") {
    const auto rc = protocol::reconcile_oracle(172, 0.05);
    CHECK(rc.success);
    // frozen: 172 h(0.05) = 49.2602766239
    CHECK(rc.cost_bits == doctest::Approx(49.2602766239445).epsilon(1e-12));
    CHECK(protocol::reconcile_oracle(10, 0.0).cost_bits == 0.0);
}

TEST_CASE("privacy amplification") {
    gf2::PrivacyMatrix id;
    for (int i = 0; i < 3; ++i) {
        gf2::BitVector row(3);
        row.set(i, 1);
        id.rows.push_back(row);
    }
    const auto alpha = gf2::BitVector::from_bits({1, 0, 1});
    RngStream rng = make_stream(1, RngPhase::PrivacyFallback, 0);
    CHECK(protocol::privacy_amplify(id, alpha, true, rng) == alpha);

    // deterministic on pass: rng untouched
    RngStream rng2 = make_stream(1, RngPhase::PrivacyFallback, 0);
    CHECK(protocol::privacy_amplify(id, alpha, true, rng2) ==
          protocol::privacy_amplify(id, alpha, true, rng2));

    // fallback keys reproduce for identical stream keys
    RngStream f1 = make_stream(9, RngPhase::PrivacyFallback, 0);
    RngStream f2 = make_stream(9, RngPhase::PrivacyFallback, 0);
    CHECK(protocol::privacy_amplify(id, alpha, false, f1) ==
          protocol::privacy_amplify(id, alpha, false, f2));
}

TEST_CASE("honest sessions are exact") {
    const auto params = small_params();
    CHECK(params.r == 7);
    CHECK(params.s == 7);
    CHECK(params.n == 27);
    const auto k = matrix_for(params);
    const auto strategy = adversary::EveStrategy::honest();

    std::size_t validated = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto rec = protocol::run_session(params, strategy, k, seed);
        if (rec.sift_failed) continue;
        CHECK(rec.error_count == 0);
        // exact anticorrelation on every sifted position
        for (std::size_t idx : rec.sifted_set)
            CHECK(rec.alice_bits[idx - 1] != rec.bob_bits[idx - 1]);
        if (rec.validation_passed) {
            ++validated;
            CHECK(rec.alice_key == rec.bob_key);
            CHECK(*rec.net_gain_bits() ==
                  doctest::Approx(4.0 - rec.reconciliation_cost_bits).epsilon(1e-12));
        }
        replay_announcement(rec);
    }
    CHECK(validated > 200);
}

TEST_CASE("sessions are reproducible bit for bit") {
    const auto params = small_params();
    const auto k = matrix_for(params);
    const auto strategy = adversary::EveStrategy::intercept_resend({0, 1, 2});
    const auto a = protocol::run_session(params, strategy, k, 1234);
    const auto b = protocol::run_session(params, strategy, k, 1234);
    CHECK(serialize::session_to_json(a) == serialize::session_to_json(b));
    CHECK(a.alice_bits == b.alice_bits);
    CHECK(a.bob_bits == b.bob_bits);
    CHECK(a.alice_key == b.alice_key);

    const auto c = protocol::run_session(params, strategy, k, 1235);
    CHECK(serialize::session_to_json(a) != serialize::session_to_json(c));
}

TEST_CASE("run_session rejects an uncertified or mismatched matrix") {
    const auto params = small_params();
    auto k = matrix_for(params);
    gf2::PrivacyMatrix uncertified = k;
    uncertified.certified_min_weight.reset();
    CHECK_THROWS_AS(
        protocol::run_session(params, adversary::EveStrategy::honest(), uncertified, 1),
        std::invalid_argument);
    gf2::PrivacyMatrix wrong_shape = k;
    wrong_shape.rows.pop_back();
    CHECK_THROWS_AS(
        protocol::run_session(params, adversary::EveStrategy::honest(), wrong_shape, 1),
        std::invalid_argument);
}

TEST_CASE("validation pass leaves at least r error-free positions") {
    // Bell-diagonal noise at half the threshold rate passes often with errors
    const auto params = protocol::derive_params(4, 0.2, 0.1, 0.05);
    const auto k = matrix_for(params);
    const auto strategy = adversary::EveStrategy::bell_diagonal({0.85, 0.05, 0.05, 0.05});
    std::size_t passes_with_errors = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const auto rec = protocol::run_session(params, strategy, k, seed);
        if (rec.sift_failed) continue;
        const std::size_t error_free = rec.sifted_set.size() - rec.error_count;
        if (rec.validation_passed) {
            CHECK(error_free >= params.r);
            CHECK(rec.reconciled_set.size() == params.r);
            CHECK(rec.alice_key == rec.bob_key);
            // R, T, E partition S
            std::set<std::size_t> all(rec.sifted_set.begin(), rec.sifted_set.end());
            std::set<std::size_t> parts;
            for (auto i : rec.reconciled_set) parts.insert(i);
            for (auto i : rec.leftover_set) parts.insert(i);
            for (auto i : rec.error_set) parts.insert(i);
            CHECK(parts == all);
            if (rec.error_count > 0) ++passes_with_errors;
        }
    }
    CHECK(passes_with_errors > 20);
}

TEST_CASE("basis agreement rate is one third") {
    const auto params = protocol::derive_params(8, 0.05, 0.1, 0.05);
    const auto k = matrix_for(params);
    std::size_t matches = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto rec = protocol::run_session(params, adversary::EveStrategy::honest(), k, seed);
        for (int d : rec.announcement.d)
            if (d == 0) ++matches;
        total += rec.announcement.d.size();
    }
    const double rate = static_cast<double>(matches) / static_cast<double>(total);
    const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / static_cast<double>(total));
    CHECK(std::abs(rate - 1.0 / 3.0) < 4.0 * sigma);
}

TEST_CASE("sift failures become failed-validation records with fallback keys") {
    // a vanishing margin puts the expected match count right at s, so
    // sifting fails often
    const auto params = protocol::derive_params(4, 0.05, 0.1, 0.001);
    const auto k = matrix_for(params);
    std::size_t failures = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto rec = protocol::run_session(params, adversary::EveStrategy::honest(), k, seed);
        if (!rec.sift_failed) continue;
        ++failures;
        CHECK(!rec.validation_passed);
        CHECK(rec.alice_key.size() == params.m);
        CHECK(rec.bob_key.size() == 0);
        CHECK(!rec.announcement.e.has_value());
        CHECK(!rec.net_gain_bits().has_value());
    }
    CHECK(failures > 0);
}

TEST_CASE("larger sifting margin lowers the sift-failure rate") {
    std::vector<double> failure_rates;
    for (double tau_s : {0.02, 0.1, 0.2}) {
        const auto params = protocol::derive_params(4, 0.05, 0.1, tau_s);
        const auto k = matrix_for(params);
        std::size_t failures = 0;
        const std::size_t runs = 3000;
        for (std::uint64_t seed = 0; seed < runs; ++seed)
            if (protocol::run_session(params, adversary::EveStrategy::honest(), k, seed).sift_failed)
                ++failures;
        failure_rates.push_back(static_cast<double>(failures) / runs);
    }
    CHECK(failure_rates[0] >= failure_rates[1]);
    CHECK(failure_rates[1] >= failure_rates[2]);
    CHECK(failure_rates[0] > failure_rates[2]);  // strict across the span
}

TEST_CASE("the key stays near-independent of the public announcement") {
    // The announcement is summarized into a small alphabet so the plug-in
    // estimate stays meaningful at this sample size; the key is a full-rank
    // image of fresh randomness, so H(key | announcement) should stay near m.
    const auto params = small_params();
    const auto k = matrix_for(params);
    const auto honest = adversary::EveStrategy::honest();
    std::vector<std::pair<std::uint64_t, std::uint64_t>> samples;
    samples.reserve(100000);
    for (std::uint64_t seed = 0; seed < 100000; ++seed) {
        const auto rec = protocol::run_session(params, honest, k, seed);
        std::uint64_t kappa = 0;
        for (std::size_t j = 0; j < params.m; ++j)
            kappa |= static_cast<std::uint64_t>(rec.alice_key.get(j)) << j;
        const std::uint64_t view = (rec.sift_failed ? 1u : 0u) |
                                   (rec.validation_passed ? 2u : 0u) |
                                   (static_cast<std::uint64_t>(rec.error_count) << 2);
        samples.emplace_back(kappa, view);
    }
    CHECK(analysis::empirical_conditional_entropy(samples) >= 3.9);
}

TEST_CASE("session JSON carries the documented fields") {
    const auto params = small_params();
    const auto k = matrix_for(params);
    const auto rec = protocol::run_session(params, adversary::EveStrategy::honest(), k, 3);
    const std::string doc = serialize::session_to_json(rec);
    for (const char* field :
         {"\"format\"", "\"index_base\"", "\"params\"", "\"seed\"", "\"strategy\"",
          "\"sift_failed\"", "\"validation_passed\"", "\"error_rate\"", "\"alice_key_hex\"",
          "\"bob_key_hex\"", "\"net_gain_bits\"", "\"eve_view\""})
        CHECK(doc.find(field) != std::string::npos);
}

TEST_CASE("key hex packing") {
    CHECK(serialize::key_to_hex(gf2::BitVector::from_bits({1, 0, 0, 1})) == "9");
    CHECK(serialize::key_to_hex(gf2::BitVector::from_bits({1, 1, 1, 1, 1})) == "f8");
    CHECK(serialize::key_to_hex(gf2::BitVector(0)) == "");
}
