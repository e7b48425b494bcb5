#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include "rng.hpp"

namespace qkd3::qcore {

using Amp = std::complex<double>;

// Polarisation state of one photon, coefficients on the basis-0 kets.
struct SingleState {
    Amp amp0{0.0, 0.0};
    Amp amp1{0.0, 0.0};
};

// Two-photon state, amplitudes ordered (|00>, |01>, |10>, |11>) in the
// basis-0 product basis. First factor is Alice's photon, second is Bob's.
struct PairState {
    std::array<Amp, 4> amps{};

    double norm_sq() const {
        double s = 0.0;
        for (const Amp& a : amps) s += std::norm(a);
        return s;
    }
};

// NORM_TOL absorbs double-precision rounding only; all identities are exact.
inline constexpr double NORM_TOL = 1e-12;

inline constexpr int NUM_BASES = 3;

// Measurement-basis kets expressed in basis-0 coordinates.
//   basis 0: |0> = (1,0), |1> = (0,1)
//   basis 1: |0> = (|0>-|1>)/sqrt2, |1> = (|0>+|1>)/sqrt2
//   basis 2: |0> = (|0>+i|1>)/sqrt2, |1> = i(|0>-i|1>)/sqrt2
// Global phases (the leading i on |1> of basis 2) are kept as written so the
// Bell-overlap closed form holds literally.
SingleState basis_ket(int basis, int bit);

// Bell basis of a photon pair; index 0 is the singlet.
PairState bell_ket(int index);

// Bell indices compatible with anticorrelated (X) and correlated (Y)
// outcomes when both parties measure in the common basis a.
std::array<int, 2> bell_x_set(int basis);  // X_a = {0, a+1}
std::array<int, 2> bell_y_set(int basis);  // Y_a = complement of X_a in {1,2,3}

// <phi|psi>
Amp inner(const PairState& phi, const PairState& psi);
Amp inner(const SingleState& phi, const SingleState& psi);

// Tensor product, Alice factor first.
PairState product_pair(const SingleState& alice, const SingleState& bob);

// Born-rule outcome distribution when Alice measures in basis a and Bob in
// basis b: entry [2*alpha + beta] = |<alpha_a, beta_b | state>|^2.
// Throws std::invalid_argument if the state is not unit norm.
std::array<double, 4> born_probabilities(const PairState& state, int a, int b);

struct Outcome {
    int alpha;
    int beta;
};

// Samples one (alpha, beta) pair from born_probabilities.
Outcome measure_pair(const PairState& state, int a, int b, RngStream& rng);

// Coefficients c with state = sum_j c_j |Bell_j>.
std::array<Amp, 4> bell_decompose(const PairState& state);

PairState bell_compose(const std::array<Amp, 4>& coeffs);

}  // namespace qkd3::qcore
