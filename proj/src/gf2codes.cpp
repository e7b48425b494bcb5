#include "gf2codes.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qkd3::gf2 {

BitVector BitVector::from_bits(const std::vector<int>& bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) v.set(i, bits[i]);
    return v;
}

std::size_t BitVector::weight() const {
    std::size_t w = 0;
    for (std::uint64_t word : words_) w += std::popcount(word);
    return w;
}

void BitVector::operator^=(const BitVector& other) {
    if (other.length_ != length_) throw std::invalid_argument("BitVector xor: length mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
}

int BitVector::dot(const BitVector& other) const {
    if (other.length_ != length_) throw std::invalid_argument("BitVector dot: length mismatch");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & other.words_[i];
    return std::popcount(acc) & 1;
}

std::string BitVector::to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p must be in [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

std::size_t code_min_weight(const PrivacyMatrix& k) {
    const std::size_t m = k.num_rows();
    if (m == 0) throw std::invalid_argument("code_min_weight: empty matrix");
    if (m > MAX_EXHAUSTIVE_ROWS)
        throw std::invalid_argument("code_min_weight: m > 20 exceeds the exhaustive certification cap");
    // Gray-code walk: successive combinations differ by one row.
    BitVector combo(k.num_cols());
    std::size_t best = k.num_cols() + 1;
    std::uint64_t gray_prev = 0;
    for (std::uint64_t i = 1; i < (std::uint64_t{1} << m); ++i) {
        const std::uint64_t gray = i ^ (i >> 1);
        const std::uint64_t changed = gray ^ gray_prev;
        combo ^= k.rows[std::countr_zero(changed)];
        gray_prev = gray;
        const std::size_t w = combo.weight();
        if (w < best) best = w;
    }
    return best;
}

int matrix_rank(const PrivacyMatrix& k) {
    std::vector<BitVector> rows = k.rows;
    const std::size_t r = k.num_cols();
    int rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < r && row < rows.size(); ++col) {
        std::size_t pivot = row;
        while (pivot < rows.size() && !rows[pivot].get(col)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[row], rows[pivot]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != row && rows[i].get(col)) rows[i] ^= rows[row];
        ++row;
        ++rank;
    }
    return rank;
}

MatrixSearchResult find_privacy_matrix(std::size_t m, std::size_t r, double d_k,
                                       std::uint64_t max_tries, RngStream& rng) {
    if (m == 0 || m > r) throw std::invalid_argument("find_privacy_matrix: need 0 < m <= r");
    if (m > MAX_EXHAUSTIVE_ROWS)
        throw std::invalid_argument("find_privacy_matrix: m > 20 exceeds the exhaustive certification cap");
    if (!(d_k < static_cast<double>(r))) throw std::invalid_argument("find_privacy_matrix: need d_k < r");

    MatrixSearchResult res;
    res.requested_rate = static_cast<double>(m) / static_cast<double>(r);
    const double half_rel = d_k / (2.0 * static_cast<double>(r));
    res.shannon_rate = (half_rel <= 1.0) ? 1.0 - binary_entropy(half_rel) : 0.0;

    for (std::uint64_t attempt = 0; attempt < max_tries; ++attempt) {
        res.tries = attempt + 1;
        PrivacyMatrix cand;
        cand.rows.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            BitVector row(r);
            for (std::size_t j = 0; j < r; ++j) row.set(j, rng.next_bit());
            cand.rows.push_back(std::move(row));
        }
        // Rank deficiency would leave some keys unreachable; reject early.
        if (matrix_rank(cand) != static_cast<int>(m)) continue;
        const std::size_t w = code_min_weight(cand);
        if (static_cast<double>(w) > d_k) {
            cand.certified_min_weight = w;
            res.matrix = std::move(cand);
            return res;
        }
    }
    return res;
}

double shannon_rate_bound(double eps, double tau) {
    if (!(eps >= 0.0 && eps < 0.25)) throw std::domain_error("shannon_rate_bound: need 0 <= eps < 1/4");
    if (!(eps / (1.0 - eps) + tau < 1.0)) throw std::domain_error("shannon_rate_bound: need eps/(1-eps) + tau < 1");
    const double arg = 0.5 * eps / (1.0 - eps) + 0.5 * tau;
    if (!(arg >= 0.0 && arg <= 1.0)) throw std::domain_error("shannon_rate_bound: entropy argument out of [0,1]");
    return 1.0 - binary_entropy(arg);
}

BitVector apply_key_map(const PrivacyMatrix& k, const BitVector& alpha) {
    if (alpha.size() != k.num_cols()) throw std::invalid_argument("apply_key_map: length mismatch");
    BitVector kappa(k.num_rows());
    for (std::size_t j = 0; j < k.num_rows(); ++j) kappa.set(j, k.rows[j].dot(alpha));
    return kappa;
}

std::string matrix_to_text(const PrivacyMatrix& k) {
    std::ostringstream out;
    out << k.num_rows() << ' ' << k.num_cols() << '\n';
    for (const BitVector& row : k.rows) out << row.to_string() << '\n';
    if (k.certified_min_weight) out << "# min_weight " << *k.certified_min_weight << '\n';
    return out.str();
}

PrivacyMatrix matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    std::size_t m = 0, r = 0;
    if (!(in >> m >> r) || m == 0 || r == 0 || m > r)
        throw std::invalid_argument("matrix file: bad header, expected \"m r\" with 0 < m <= r");
    PrivacyMatrix k;
    std::string line;
    std::getline(in, line);
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::getline(in, line) || line.size() != r)
            throw std::invalid_argument("matrix file: row " + std::to_string(i + 1) + " has wrong length");
        BitVector row(r);
        for (std::size_t j = 0; j < r; ++j) {
            if (line[j] == '1') row.set(j, 1);
            else if (line[j] != '0') throw std::invalid_argument("matrix file: rows must be '0'/'1' characters");
        }
        k.rows.push_back(std::move(row));
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream meta(line);
        std::string hash, key;
        std::size_t w = 0;
        if (meta >> hash >> key >> w && hash == "#" && key == "min_weight") {
            // The stored weight is a claim; recertify so a corrupted file
            // cannot smuggle in an uncertified matrix.
            if (code_min_weight(k) != w)
                throw std::invalid_argument("matrix file: stored min_weight does not match recertification");
            k.certified_min_weight = w;
        } else {
            throw std::invalid_argument("matrix file: unrecognized trailing line: " + line);
        }
    }
    return k;
}

void save_matrix(const PrivacyMatrix& k, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << matrix_to_text(k);
}

PrivacyMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return matrix_from_text(buf.str());
}

}  // namespace qkd3::gf2
