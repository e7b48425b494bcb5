#include "qcore.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd3::qcore {

namespace {
const double INV_SQRT2 = 1.0 / std::sqrt(2.0);
const Amp I_UNIT{0.0, 1.0};
}  // namespace

SingleState basis_ket(int basis, int bit) {
    if (basis < 0 || basis >= NUM_BASES) throw std::invalid_argument("basis_ket: basis must be 0, 1 or 2");
    if (bit < 0 || bit > 1) throw std::invalid_argument("basis_ket: bit must be 0 or 1");
    switch (basis) {
        case 0:
            return bit == 0 ? SingleState{1.0, 0.0} : SingleState{0.0, 1.0};
        case 1:
            // |0>_1 = (|0> - |1>)/sqrt2, |1>_1 = (|0> + |1>)/sqrt2
            return bit == 0 ? SingleState{INV_SQRT2, -INV_SQRT2}
                            : SingleState{INV_SQRT2, INV_SQRT2};
        default:
            // |0>_2 = (|0> + i|1>)/sqrt2, |1>_2 = i(|0> - i|1>)/sqrt2
            return bit == 0 ? SingleState{INV_SQRT2, I_UNIT * INV_SQRT2}
                            : SingleState{I_UNIT * INV_SQRT2, INV_SQRT2};
    }
}

PairState bell_ket(int index) {
    PairState s;
    switch (index) {
        case 0:  // (|01> - |10>)/sqrt2, the singlet
            s.amps = {Amp{0.0}, Amp{INV_SQRT2}, Amp{-INV_SQRT2}, Amp{0.0}};
            break;
        case 1:  // (|01> + |10>)/sqrt2
            s.amps = {Amp{0.0}, Amp{INV_SQRT2}, Amp{INV_SQRT2}, Amp{0.0}};
            break;
        case 2:  // (|00> - |11>)/sqrt2
            s.amps = {Amp{INV_SQRT2}, Amp{0.0}, Amp{0.0}, Amp{-INV_SQRT2}};
            break;
        case 3:  // (|00> + |11>)/sqrt2
            s.amps = {Amp{INV_SQRT2}, Amp{0.0}, Amp{0.0}, Amp{INV_SQRT2}};
            break;
        default:
            throw std::invalid_argument("bell_ket: index must be in {0,1,2,3}");
    }
    return s;
}

std::array<int, 2> bell_x_set(int basis) {
    if (basis < 0 || basis >= NUM_BASES) throw std::invalid_argument("bell_x_set: bad basis");
    return {0, basis + 1};
}

std::array<int, 2> bell_y_set(int basis) {
    switch (basis) {
        case 0: return {2, 3};
        case 1: return {1, 3};
        case 2: return {1, 2};
        default: throw std::invalid_argument("bell_y_set: bad basis");
    }
}

Amp inner(const PairState& phi, const PairState& psi) {
    Amp r{0.0, 0.0};
    for (int k = 0; k < 4; ++k) r += std::conj(phi.amps[k]) * psi.amps[k];
    return r;
}

Amp inner(const SingleState& phi, const SingleState& psi) {
    return std::conj(phi.amp0) * psi.amp0 + std::conj(phi.amp1) * psi.amp1;
}

PairState product_pair(const SingleState& alice, const SingleState& bob) {
    PairState s;
    s.amps[0] = alice.amp0 * bob.amp0;
    s.amps[1] = alice.amp0 * bob.amp1;
    s.amps[2] = alice.amp1 * bob.amp0;
    s.amps[3] = alice.amp1 * bob.amp1;
    return s;
}

std::array<double, 4> born_probabilities(const PairState& state, int a, int b) {
    if (std::abs(state.norm_sq() - 1.0) > NORM_TOL)
        throw std::invalid_argument("born_probabilities: state is not unit norm");
    std::array<double, 4> p{};
    for (int alpha = 0; alpha < 2; ++alpha) {
        for (int beta = 0; beta < 2; ++beta) {
            PairState outcome = product_pair(basis_ket(a, alpha), basis_ket(b, beta));
            p[2 * alpha + beta] = std::norm(inner(outcome, state));
        }
    }
    return p;
}

Outcome measure_pair(const PairState& state, int a, int b, RngStream& rng) {
    const std::array<double, 4> p = born_probabilities(state, a, b);
    const double u = rng.next_double();
    double acc = 0.0;
    int k = 0;
    for (; k < 3; ++k) {
        acc += p[k];
        if (u < acc) break;
    }
    return Outcome{k >> 1, k & 1};
}

std::array<Amp, 4> bell_decompose(const PairState& state) {
    std::array<Amp, 4> c{};
    for (int j = 0; j < 4; ++j) c[j] = inner(bell_ket(j), state);
    return c;
}

PairState bell_compose(const std::array<Amp, 4>& coeffs) {
    PairState s;
    for (int j = 0; j < 4; ++j) {
        const PairState b = bell_ket(j);
        for (int k = 0; k < 4; ++k) s.amps[k] += coeffs[j] * b.amps[k];
    }
    return s;
}

}  // namespace qkd3::qcore
