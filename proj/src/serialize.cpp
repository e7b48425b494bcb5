#include "serialize.hpp"

#include <cstdio>

#include <json.hpp>

#include "analysis.hpp"

namespace qkd3::serialize {

using ordered_json = nlohmann::ordered_json;

std::string key_to_hex(const gf2::BitVector& bits) {
    std::string hex;
    const std::size_t nibbles = (bits.size() + 3) / 4;
    for (std::size_t i = 0; i < nibbles; ++i) {
        int v = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            const std::size_t pos = 4 * i + j;
            v = (v << 1) | (pos < bits.size() ? bits.get(pos) : 0);
        }
        hex.push_back("0123456789abcdef"[v]);
    }
    return hex;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

namespace {

ordered_json eve_view_summary(const protocol::SessionRecord& rec) {
    ordered_json view;
    switch (rec.eve_view.kind) {
        case adversary::StrategyKind::Honest:
            view["kind"] = "honest";
            break;
        case adversary::StrategyKind::InterceptResend: {
            view["kind"] = "intercept";
            std::size_t matches = 0;
            for (std::size_t i = 0; i < rec.eve_view.pairs.size(); ++i)
                if (rec.eve_view.pairs[i].eve_basis == rec.announcement.a[i]) ++matches;
            view["pairs"] = rec.eve_view.pairs.size();
            view["basis_match_count"] = matches;
            break;
        }
        case adversary::StrategyKind::BellDiagonal: {
            view["kind"] = "belldiag";
            std::array<std::size_t, 4> counts{};
            for (const auto& p : rec.eve_view.pairs)
                if (p.bell_index >= 0) ++counts[p.bell_index];
            view["bell_counts"] = counts;
            break;
        }
    }
    return view;
}

}  // namespace

std::string session_to_json(const protocol::SessionRecord& rec) {
    ordered_json doc;
    doc["format"] = "qkd3.session.v1";
    doc["index_base"] = 1;
    ordered_json params;
    params["m"] = rec.params.m;
    params["eps"] = rec.params.eps;
    params["tau"] = rec.params.tau;
    params["tau_s"] = rec.params.tau_s;
    params["r"] = rec.params.r;
    params["s"] = rec.params.s;
    params["n"] = rec.params.n;
    params["d_k"] = rec.params.d_k;
    doc["params"] = params;
    doc["seed"] = rec.seed;
    doc["strategy"] = rec.strategy_spec;
    doc["sift_failed"] = rec.sift_failed;
    doc["validation_passed"] = rec.validation_passed;
    if (rec.sift_failed) {
        doc["error_count"] = nullptr;
        doc["error_rate"] = nullptr;
    } else {
        doc["error_count"] = rec.error_count;
        doc["error_rate"] = rec.sifted_error_rate();
    }
    doc["alice_key_hex"] = key_to_hex(rec.alice_key);
    if (rec.validation_passed) {
        doc["bob_key_hex"] = key_to_hex(rec.bob_key);
        doc["reconciliation_cost_bits"] = rec.reconciliation_cost_bits;
        doc["net_gain_bits"] = *rec.net_gain_bits();
    } else {
        doc["bob_key_hex"] = nullptr;
        doc["reconciliation_cost_bits"] = nullptr;
        doc["net_gain_bits"] = nullptr;
    }
    doc["eve_view"] = eve_view_summary(rec);
    return doc.dump(2) + "\n";
}

std::string session_csv_header(const std::string& extra_column) {
    std::string h = "trial,";
    if (!extra_column.empty()) h += extra_column + ",";
    return h + "seed,error_rate,validation_passed,net_gain_bits\n";
}

std::string threshold_report_csv(double eps_min, double eps_max, double eps_step) {
    const analysis::KeyRateReport rep = analysis::key_rate_report(eps_min, eps_max, eps_step);
    std::string out = "eps,gain2,gain3\n";
    for (std::size_t i = 0; i < rep.eps_grid.size(); ++i) {
        out += format_double(rep.eps_grid[i]) + "," + format_double(rep.gain2[i]) + "," +
               format_double(rep.gain3[i]) + "\n";
    }
    out += "threshold," + format_double(rep.threshold2) + "," + format_double(rep.threshold3) + "\n";
    return out;
}

std::string session_csv_row(const protocol::SessionRecord& rec, std::uint64_t trial,
                            const std::string& extra_value) {
    std::string row = std::to_string(trial) + ",";
    if (!extra_value.empty()) row += extra_value + ",";
    row += std::to_string(rec.seed) + ",";
    row += rec.sift_failed ? "" : format_double(rec.sifted_error_rate());
    row += ",";
    row += rec.validation_passed ? "1" : "0";
    row += ",";
    if (const auto gain = rec.net_gain_bits()) row += format_double(*gain);
    row += "\n";
    return row;
}

}  // namespace qkd3::serialize
