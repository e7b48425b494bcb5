#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qcore.hpp"
#include "rng.hpp"

namespace qkd3::adversary {

enum class StrategyKind { Honest, InterceptResend, BellDiagonal };

// Source behaviour per emitted pair. The source need not be trusted: an
// intercept-resend attacker replaces each pair by a measured product state,
// a Bell-diagonal source models channel noise by emitting Bell state j with
// probability p[j].
struct EveStrategy {
    StrategyKind kind = StrategyKind::Honest;
    std::vector<int> bases;         // InterceptResend: nonempty subset of {0,1,2}
    std::array<double, 4> bell_p{}; // BellDiagonal: probabilities, sum 1

    static EveStrategy honest();
    static EveStrategy intercept_resend(std::vector<int> bases);
    static EveStrategy bell_diagonal(const std::array<double, 4>& p);

    // Grammar: honest | intercept{bases=[0,1,2]} | belldiag{p=[p0,p1,p2,p3]}
    static EveStrategy parse(const std::string& spec);
    std::string to_spec() const;
};

// Per-pair classical record Eve keeps.
struct PairView {
    int eve_basis = -1;   // InterceptResend
    int eve_bit = -1;     // InterceptResend
    int bell_index = -1;  // BellDiagonal
};

struct EmittedPair {
    qcore::PairState state;
    PairView view;
};

EmittedPair emit_pair(const EveStrategy& strategy, RngStream& rng);

// Exact sifted error rate (closed form):
//   Honest -> 0; InterceptResend -> 1/3 for any nonempty basis set;
//   BellDiagonal(p) -> (2/3)(1 - p0).
double expected_error_rate(const EveStrategy& strategy);

// Sifted error rate conditioned on the common basis a, for a = 0,1,2.
// For BellDiagonal(p) this is sum of p_j over j in Y_a.
std::array<double, 3> expected_error_rate_per_basis(const EveStrategy& strategy);

}  // namespace qkd3::adversary
