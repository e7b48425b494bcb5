#pragma once

#include <string>

#include "gf2codes.hpp"
#include "protocol.hpp"

namespace qkd3::serialize {

// Bits packed most-significant-first into hex nibbles; the tail nibble is
// zero-padded. Empty vector -> empty string.
std::string key_to_hex(const gf2::BitVector& bits);

// Canonical session document (stable key order, shortest round-trip doubles),
// byte-identical for identical config + seed.
std::string session_to_json(const protocol::SessionRecord& rec);

// Flat single-line CSV row for sweeps; `extra` columns are prepended.
std::string session_csv_header(const std::string& extra_column);
std::string session_csv_row(const protocol::SessionRecord& rec, std::uint64_t trial,
                            const std::string& extra_value);

std::string format_double(double v);

// "eps,gain2,gain3" rows over the grid, then "threshold,<root2>,<root3>".
std::string threshold_report_csv(double eps_min, double eps_max, double eps_step);

}  // namespace qkd3::serialize
