#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"

namespace qkd3::gf2 {

// Bit vector over GF(2), packed 64 bits per word.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t length)
        : length_(length), words_((length + 63) / 64, 0) {}

    static BitVector from_bits(const std::vector<int>& bits);

    std::size_t size() const { return length_; }
    bool empty() const { return length_ == 0; }

    int get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
    void set(std::size_t i, int v) {
        const std::uint64_t mask = std::uint64_t{1} << (i % 64);
        if (v) words_[i / 64] |= mask; else words_[i / 64] &= ~mask;
    }

    std::size_t weight() const;
    void operator^=(const BitVector& other);
    bool operator==(const BitVector& other) const = default;

    // inner product mod 2
    int dot(const BitVector& other) const;

    std::string to_string() const;  // '0'/'1' characters, index 0 first

private:
    std::size_t length_ = 0;
    std::vector<std::uint64_t> words_;
};

// m x r binary matrix whose row combinations all clear a weight floor; the
// protocol compresses the reconciled key through it.
struct PrivacyMatrix {
    std::vector<BitVector> rows;                    // m rows of length r
    std::optional<std::size_t> certified_min_weight;

    std::size_t num_rows() const { return rows.size(); }
    std::size_t num_cols() const { return rows.empty() ? 0 : rows[0].size(); }
};

// h(p) = -p log2 p - (1-p) log2(1-p), with h(0) = h(1) = 0.
// Throws std::domain_error outside [0,1].
double binary_entropy(double p);

// Exhaustive minimum Hamming weight over all 2^m - 1 nonzero row
// combinations. Requires m <= 20 (otherwise std::invalid_argument).
std::size_t code_min_weight(const PrivacyMatrix& k);

inline constexpr std::size_t MAX_EXHAUSTIVE_ROWS = 20;

int matrix_rank(const PrivacyMatrix& k);

struct MatrixSearchResult {
    std::optional<PrivacyMatrix> matrix;
    std::uint64_t tries = 0;
    // Feasibility diagnostic when the search fails: the requested rate m/r
    // against the asymptotic Shannon rate 1 - h(d_k / (2r)).
    double requested_rate = 0.0;
    double shannon_rate = 0.0;
};

// Random search over full-rank m x r matrices with exhaustive certification
// of every candidate. min weight must strictly exceed d_k (a real).
MatrixSearchResult find_privacy_matrix(std::size_t m, std::size_t r, double d_k,
                                       std::uint64_t max_tries, RngStream& rng);

// Maximal admissible m/r ratio: 1 - h(eps/(2(1-eps)) + tau/2).
// Throws std::domain_error when the setup constants are out of range.
double shannon_rate_bound(double eps, double tau);

// kappa = K * alpha mod 2. Throws std::invalid_argument on length mismatch.
BitVector apply_key_map(const PrivacyMatrix& k, const BitVector& alpha);

// Matrix file format: header "m r", then m rows of '0'/'1' characters,
// optionally a trailing "# min_weight <w>" line. Round-trips bit-exact.
std::string matrix_to_text(const PrivacyMatrix& k);
PrivacyMatrix matrix_from_text(const std::string& text);
void save_matrix(const PrivacyMatrix& k, const std::string& path);
PrivacyMatrix load_matrix(const std::string& path);

}  // namespace qkd3::gf2
