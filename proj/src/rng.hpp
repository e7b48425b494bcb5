#pragma once

#include <cstdint>

namespace qkd3 {

// Counter-based random stream: splitmix64 over a keyed counter.
// Streams for different (seed, phase, index) keys are independent, cheap to
// construct, and reproduce exactly regardless of evaluation order, so sweeps
// can derive per-trial streams without sharing state.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t phase, std::uint64_t index) {
    std::uint64_t k = splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (phase + 1)));
    return splitmix64(k ^ (0xd1b54a32d192ed03ULL * (index + 1)));
}

class RngStream {
public:
    explicit RngStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in {0, ..., n-1}; rejection keeps the draw unbiased
    std::uint32_t next_below(std::uint32_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return static_cast<std::uint32_t>(v % n);
    }

    int next_bit() { return static_cast<int>(next_u64() >> 63); }

private:
    std::uint64_t state_;
};

// Phase tags for deriving independent substreams from one session seed.
enum class RngPhase : std::uint64_t {
    AliceBases = 1,
    BobBases = 2,
    Source = 3,
    Measure = 4,
    PrivacyFallback = 5,
    MatrixSearch = 6,
    Trial = 7,
};

inline RngStream make_stream(std::uint64_t seed, RngPhase phase, std::uint64_t index = 0) {
    return RngStream(mix_key(seed, static_cast<std::uint64_t>(phase), index));
}

}  // namespace qkd3
