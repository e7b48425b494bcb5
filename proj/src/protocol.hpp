#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "gf2codes.hpp"
#include "rng.hpp"

namespace qkd3::protocol {

// All setup constants. Derived fields obey
//   r = smallest integer with m/r <= 1 - h(eps/(2(1-eps)) + tau/2)
//   s = floor(r / (1-eps))
//   n = ceil(r / ((1-eps)/3 - tau_s))
//   d_k = (eps/(1-eps) + tau) r
struct ProtocolParams {
    std::size_t m = 0;    // private key length (bits)
    double eps = 0.0;     // error-rate threshold, < 1/4
    double tau = 0.0;     // security constant
    double tau_s = 0.0;   // sifting margin, in (0, (1-eps)/3)
    std::size_t r = 0;    // reconciled length
    std::size_t s = 0;    // sifted length
    std::size_t n = 0;    // emitted pair count
    double d_k = 0.0;     // weight floor for the privacy matrix (real-valued)
};

// Throws std::invalid_argument naming the violated setup inequality.
ProtocolParams derive_params(std::size_t m, double eps, double tau, double tau_s);

// Everything both parties say in the clear: bases, basis differences, and the
// error vector (absent when sifting failed before error detection).
struct PublicAnnouncement {
    std::vector<int> a;                      // Alice's bases, length n
    std::vector<int> d;                      // d_i = (b_i - a_i) mod 3
    std::optional<gf2::BitVector> e;         // error vector over S positions
};

struct SiftResult {
    std::vector<int> d;
    std::vector<std::size_t> sifted;  // first s indices with a_i == b_i (1-indexed)
    bool failed = false;
};

// Sifting over announced bases; fails when fewer than s positions match.
SiftResult sift(const std::vector<int>& a, const std::vector<int>& b, std::size_t s);

struct ErrorDetection {
    gf2::BitVector e;                     // e_i = 1 iff alpha_i == beta_i (position within S)
    std::vector<std::size_t> error_set;   // original indices (subset of S)
};

// An error is a CORRELATED outcome: the honest source is antisymmetric, so
// matching bits mean the transmission was disturbed.
ErrorDetection detect_errors(const std::vector<int>& alpha_s, const std::vector<int>& beta_s);

// Pass iff error_count < eps * s (strict, real-valued comparison).
bool validate(std::size_t error_count, std::size_t s, double eps);

struct Partition {
    std::vector<std::size_t> reconciled;  // R: first r error-free sifted indices
    std::vector<std::size_t> leftover;    // T = S \ (E u R)
};

// Requires |S \ E| >= r, which validation guarantees; throws std::logic_error
// otherwise.
Partition partition_reconciled(const std::vector<std::size_t>& sifted,
                               const std::vector<std::size_t>& error_set, std::size_t r);

struct ReconcileResult {
    bool success = true;
    double cost_bits = 0.0;  // s * h(eps), charged at parameter level
};

// Oracle reconciliation: the simulator sees both strings, so the exact error
// vector comes for free; only the one-time-pad cost is accounted.
ReconcileResult reconcile_oracle(std::size_t s, double eps);

// kappa = K alpha_r on validation pass, fresh uniform m-bit string otherwise.
gf2::BitVector privacy_amplify(const gf2::PrivacyMatrix& k, const gf2::BitVector& alpha_r,
                               bool validation_passed, RngStream& rng);

// Classical record Eve accumulates, one entry per pair.
struct EveViewRecord {
    adversary::StrategyKind kind = adversary::StrategyKind::Honest;
    std::vector<adversary::PairView> pairs;
};

struct SessionRecord {
    ProtocolParams params;
    std::uint64_t seed = 0;
    std::string strategy_spec;

    PublicAnnouncement announcement;
    std::vector<int> alice_bits;   // alpha, length n (simulator-internal)
    std::vector<int> bob_bits;     // beta, length n (simulator-internal)

    std::vector<std::size_t> sifted_set;      // S, 1-indexed
    std::vector<std::size_t> error_set;       // E subset of S
    std::vector<std::size_t> reconciled_set;  // R
    std::vector<std::size_t> leftover_set;    // T
    std::size_t error_count = 0;              // e = |E|

    bool sift_failed = false;
    bool validation_passed = false;

    gf2::BitVector alice_key;  // kappa (fallback key on validation failure)
    gf2::BitVector bob_key;    // empty unless validation passed
    double reconciliation_cost_bits = 0.0;

    EveViewRecord eve_view;

    // e / s over the sifted set; meaningless when sifting failed.
    double sifted_error_rate() const;
    // m - reconciliation cost; only defined when validation passed.
    std::optional<double> net_gain_bits() const;
};

// One full protocol run. K must be certified for params (m rows, r columns,
// min weight > d_k); throws std::invalid_argument otherwise.
SessionRecord run_session(const ProtocolParams& params, const adversary::EveStrategy& strategy,
                          const gf2::PrivacyMatrix& k, std::uint64_t seed);

}  // namespace qkd3::protocol
