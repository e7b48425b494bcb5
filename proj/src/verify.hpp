#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proofcheck.hpp"

namespace qkd3::verify {

// The built-in operator-certification grid: every structural (n, s, r)
// combination up to max_pairs crossed with eps in {0.05,0.10,0.15,0.20} and
// tau at {25%, 50%, 75%} of its admissible range, d_k pinned to the setup
// formula. With max_pairs >= 4 an n = 5 showcase with nonzero error vectors
// is appended.
std::vector<proofcheck::TinyInstance> spectral_bound_grid(std::size_t max_pairs);

struct VerifyOptions {
    std::size_t max_pairs = 4;   // operator grid runs n = 1..max_pairs
    bool perturb_bell = false;   // harness self-test: flip one Bell amplitude sign
    std::uint64_t seed = 1;      // randomized checks derive their streams from this
};

struct CheckRecord {
    std::string name;
    std::string instance;  // human-readable parameters, empty for global checks
    double value = 0.0;    // measured quantity (residual, margin, extremum)
    double bound = 0.0;    // the limit it is held against
    bool pass = false;
    std::string note;
};

struct VerifyReport {
    std::vector<CheckRecord> records;
    bool all_pass = false;
    bool perturbed = false;
    std::size_t spectral_bound_instances = 0;
};

// Runs the full operator/identity certification plus the analysis property
// suite. Deterministic for fixed options.
VerifyReport run_verification(const VerifyOptions& opts);

std::string report_to_json(const VerifyReport& rep);

}  // namespace qkd3::verify
