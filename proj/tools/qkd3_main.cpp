// qkd3 command-line front end. Links the C API of the shared library only.

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkd3/qkd3.h"

namespace {

// Exit codes are a stable contract:
//   0 success / validation passed
//   1 configuration error
//   2 certification failure
//   3 validation-failed session
//   4 matrix search failure
constexpr int EXIT_CONFIG = 1;
constexpr int EXIT_CERT = 2;
constexpr int EXIT_VALIDATION = 3;
constexpr int EXIT_MATRIX = 4;

struct StringOut {
    char* ptr = nullptr;
    ~StringOut() { qkd3_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "qkd3: " << msg << "\n";
    std::exit(code);
}

void check(qkd3_status st, int code_on_error) {
    if (st != QKD3_OK) die(code_on_error, std::string(qkd3_status_name(st)) + ": " + qkd3_last_error());
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) die(EXIT_CONFIG, "cannot open output file: " + path);
    out << content;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct ProtocolOptions {
    std::uint32_t m = 8;
    double eps = 0.05;
    double tau = 0.1;
    double tau_s = 0.05;
    std::string strategy = "honest";
    std::string matrix_path;
    std::uint64_t max_tries = 20000;
    std::uint64_t seed = 1;
    std::string out;
};

std::string g_config_path;  // consumed by the prescan; declared for help output

void add_config_flag(CLI::App* cmd) {
    cmd->add_option("--config", g_config_path, "flat key=value configuration; flags override");
    // config-injected tokens come first, command-line repeats win
    for (CLI::Option* opt : cmd->get_options())
        if (opt->get_expected_min() > 0) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_protocol_flags(CLI::App* cmd, ProtocolOptions& opt, bool with_strategy = true) {
    cmd->add_option("-m,--key-bits", opt.m, "private key length (bits, <= 20)");
    cmd->add_option("--eps", opt.eps, "error-rate threshold (< 1/4)");
    cmd->add_option("--tau", opt.tau, "security constant");
    cmd->add_option("--tau-s", opt.tau_s, "sifting margin (0 < tau_s < (1-eps)/3)");
    if (with_strategy)
        cmd->add_option("--strategy", opt.strategy,
                        "honest | intercept{bases=[...]} | belldiag{p=[...]}");
    cmd->add_option("--matrix", opt.matrix_path, "privacy matrix file (generated when absent)");
    cmd->add_option("--max-tries", opt.max_tries, "matrix search attempts");
    cmd->add_option("--seed", opt.seed, "64-bit master seed");
    cmd->add_option("-o,--out", opt.out, "output path (stdout when omitted)");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Flat key=value lines become option tokens inserted right after the
// subcommand, so anything also given on the command line overrides them.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) die(EXIT_CONFIG, "cannot read config file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#') continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            die(EXIT_CONFIG, "config line is not key=value: " + entry);
        const std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\'')))
            value = value.substr(1, value.size() - 2);
        if (key.empty() || key == "config") die(EXIT_CONFIG, "bad config key in: " + entry);
        if (value == "true") {
            tokens.push_back("--" + key);
        } else if (value == "false") {
            continue;
        } else {
            tokens.push_back("--" + key);
            tokens.push_back(value);
        }
    }
    return tokens;
}

std::vector<std::string> rebuild_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;
    // insertion point: right after the subcommand name
    std::size_t at = 0;
    while (at < args.size() && !args[at].empty() && args[at][0] == '-') ++at;
    if (at < args.size()) ++at;
    const std::vector<std::string> injected = config_tokens(config_path);
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
    return args;
}

using ParamsPtr = std::unique_ptr<qkd3_params, decltype(&qkd3_params_free)>;
using StrategyPtr = std::unique_ptr<qkd3_strategy, decltype(&qkd3_strategy_free)>;
using MatrixPtr = std::unique_ptr<qkd3_matrix, decltype(&qkd3_matrix_free)>;
using SessionPtr = std::unique_ptr<qkd3_session, decltype(&qkd3_session_free)>;

ParamsPtr derive_params(const ProtocolOptions& opt) {
    qkd3_params* raw = nullptr;
    check(qkd3_params_derive(opt.m, opt.eps, opt.tau, opt.tau_s, &raw), EXIT_CONFIG);
    return ParamsPtr(raw, &qkd3_params_free);
}

StrategyPtr parse_strategy(const std::string& spec) {
    qkd3_strategy* raw = nullptr;
    check(qkd3_strategy_parse(spec.c_str(), &raw), EXIT_CONFIG);
    return StrategyPtr(raw, &qkd3_strategy_free);
}

MatrixPtr obtain_matrix(const ProtocolOptions& opt, const qkd3_params* params) {
    qkd3_matrix* raw = nullptr;
    if (!opt.matrix_path.empty()) {
        check(qkd3_matrix_load(opt.matrix_path.c_str(), &raw), EXIT_CONFIG);
        if (qkd3_matrix_rows(raw) != qkd3_params_m(params) ||
            qkd3_matrix_cols(raw) != qkd3_params_r(params)) {
            qkd3_matrix_free(raw);
            die(EXIT_CONFIG, "matrix file shape does not match the derived parameters");
        }
    } else {
        check(qkd3_matrix_generate(params, opt.max_tries, opt.seed, &raw), EXIT_MATRIX);
    }
    return MatrixPtr(raw, &qkd3_matrix_free);
}

SessionPtr run_one(const qkd3_params* params, const qkd3_strategy* strategy, const qkd3_matrix* k,
                   std::uint64_t seed) {
    qkd3_session* raw = nullptr;
    check(qkd3_session_run(params, strategy, k, seed, &raw), EXIT_CONFIG);
    return SessionPtr(raw, &qkd3_session_free);
}

int cmd_run(const ProtocolOptions& opt, const std::string& format) {
    ParamsPtr params = derive_params(opt);
    StrategyPtr strategy = parse_strategy(opt.strategy);
    MatrixPtr matrix = obtain_matrix(opt, params.get());
    SessionPtr session = run_one(params.get(), strategy.get(), matrix.get(), opt.seed);

    StringOut doc;
    if (format == "json") {
        check(qkd3_session_to_json(session.get(), &doc.ptr), EXIT_CONFIG);
    } else if (format == "csv") {
        StringOut header, row;
        check(qkd3_session_csv_header("", &header.ptr), EXIT_CONFIG);
        check(qkd3_session_csv_row(session.get(), 0, "", &row.ptr), EXIT_CONFIG);
        doc.ptr = nullptr;
        write_output(opt.out, header.str() + row.str());
        return qkd3_session_validation_passed(session.get()) ? 0 : EXIT_VALIDATION;
    } else {
        die(EXIT_CONFIG, "format must be json or csv");
    }
    write_output(opt.out, doc.str());
    return qkd3_session_validation_passed(session.get()) ? 0 : EXIT_VALIDATION;
}

struct SweepRow {
    std::uint64_t trial = 0;
    bool has_value = false;
    double value = 0.0;
    std::uint64_t seed = 0;
    bool rated = false;
    double error_rate = 0.0;
    bool passed = false;
    bool has_gain = false;
    double gain = 0.0;
};

struct SweepAggregate {
    bool has_value = false;
    double value = 0.0;
    std::uint64_t rows = 0;
    std::uint64_t rated = 0;
    std::uint64_t passed = 0;
    double rate_sum = 0.0;
    double gain_sum = 0.0;

    void add(const SweepRow& r) {
        ++rows;
        if (r.rated) {
            ++rated;
            rate_sum += r.error_rate;
        }
        if (r.passed) ++passed;
        if (r.has_gain) gain_sum += r.gain;
    }
};

SweepRow sweep_row_from(const qkd3_session* s, std::uint64_t trial, std::uint64_t seed) {
    SweepRow row;
    row.trial = trial;
    row.seed = seed;
    row.rated = qkd3_session_error_rate(s, &row.error_rate) == QKD3_OK;
    row.passed = qkd3_session_validation_passed(s) != 0;
    row.has_gain = qkd3_session_net_gain_bits(s, &row.gain) == QKD3_OK;
    return row;
}

std::string sweep_to_csv(const std::string& var, const std::vector<SweepRow>& rows,
                         const std::vector<SweepAggregate>& aggs) {
    const bool by_value = !rows.empty() && rows.front().has_value;
    StringOut header;
    check(qkd3_session_csv_header(by_value ? var.c_str() : "", &header.ptr), EXIT_CONFIG);
    std::string csv = header.str();
    std::size_t agg_at = 0;
    auto mean_row = [&](const SweepAggregate& a) {
        std::string row = "mean,";
        if (a.has_value) row += fmt_double(a.value) + ",";
        row += ",";  // seed column
        row += a.rated ? fmt_double(a.rate_sum / static_cast<double>(a.rated)) : "";
        row += ",";
        row += fmt_double(static_cast<double>(a.passed) / static_cast<double>(a.rows ? a.rows : 1));
        row += ",";
        if (a.passed) row += fmt_double(a.gain_sum / static_cast<double>(a.passed));
        return row + "\n";
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        if (agg_at < aggs.size() && r.has_value && aggs[agg_at].has_value &&
            r.value != aggs[agg_at].value)
            csv += mean_row(aggs[agg_at++]);
        csv += std::to_string(r.trial) + ",";
        if (r.has_value) csv += fmt_double(r.value) + ",";
        csv += std::to_string(r.seed) + ",";
        csv += r.rated ? fmt_double(r.error_rate) : "";
        csv += ",";
        csv += r.passed ? "1" : "0";
        csv += ",";
        if (r.has_gain) csv += fmt_double(r.gain);
        csv += "\n";
    }
    for (; agg_at < aggs.size(); ++agg_at) csv += mean_row(aggs[agg_at]);
    return csv;
}

std::string sweep_to_json(const std::string& var, const std::vector<SweepRow>& rows,
                          const std::vector<SweepAggregate>& aggs) {
    nlohmann::ordered_json doc;
    doc["format"] = "qkd3.sweep.v1";
    doc["var"] = var;
    nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
    for (const SweepRow& r : rows) {
        nlohmann::ordered_json j;
        j["trial"] = r.trial;
        if (r.has_value) j[var] = r.value;
        j["seed"] = r.seed;
        if (r.rated) j["error_rate"] = r.error_rate; else j["error_rate"] = nullptr;
        j["validation_passed"] = r.passed;
        if (r.has_gain) j["net_gain_bits"] = r.gain; else j["net_gain_bits"] = nullptr;
        jrows.push_back(j);
    }
    doc["rows"] = jrows;
    nlohmann::ordered_json jaggs = nlohmann::ordered_json::array();
    for (const SweepAggregate& a : aggs) {
        nlohmann::ordered_json j;
        if (a.has_value) j[var] = a.value;
        j["rows"] = a.rows;
        if (a.rated) j["mean_error_rate"] = a.rate_sum / static_cast<double>(a.rated);
        else j["mean_error_rate"] = nullptr;
        j["validation_pass_rate"] =
            static_cast<double>(a.passed) / static_cast<double>(a.rows ? a.rows : 1);
        if (a.passed) j["mean_net_gain_bits"] = a.gain_sum / static_cast<double>(a.passed);
        else j["mean_net_gain_bits"] = nullptr;
        jaggs.push_back(j);
    }
    doc["aggregates"] = jaggs;
    return doc.dump(2) + "\n";
}

int cmd_sweep(const ProtocolOptions& opt, const std::string& var, std::vector<double> values,
              std::uint64_t trials, const std::string& format) {
    if (trials < 1) die(EXIT_CONFIG, "sweep needs trials >= 1");
    if (format != "csv" && format != "json") die(EXIT_CONFIG, "format must be csv or json");
    const bool by_value = var == "eps" || var == "lambda";
    if (by_value && values.empty()) die(EXIT_CONFIG, "sweep over " + var + " needs --values");
    if (!by_value && var != "seed") die(EXIT_CONFIG, "sweep variable must be seed, eps or lambda");
    if (!by_value) values = {0.0};  // single block

    std::vector<SweepRow> rows;
    std::vector<SweepAggregate> aggs;
    std::uint64_t trial_index = 0;
    for (double value : values) {
        ProtocolOptions local = opt;
        std::string strategy_spec = opt.strategy;
        if (var == "eps") {
            local.eps = value;
        } else if (var == "lambda") {
            const double p0 = 1.0 - 0.75 * value;
            if (p0 < 0.0) die(EXIT_CONFIG, "lambda must be <= 4/3");
            strategy_spec = "belldiag{p=[" + fmt_double(p0) + "," + fmt_double(value / 4.0) + "," +
                            fmt_double(value / 4.0) + "," + fmt_double(value / 4.0) + "]}";
        }
        ParamsPtr params = derive_params(local);
        StrategyPtr strategy = parse_strategy(strategy_spec);
        MatrixPtr matrix = obtain_matrix(local, params.get());
        SweepAggregate agg;
        agg.has_value = by_value;
        agg.value = value;
        for (std::uint64_t t = 0; t < trials; ++t, ++trial_index) {
            const std::uint64_t seed = qkd3_mix_seed(opt.seed, trial_index);
            SessionPtr session = run_one(params.get(), strategy.get(), matrix.get(), seed);
            SweepRow row = sweep_row_from(session.get(), trial_index, seed);
            row.has_value = by_value;
            row.value = value;
            rows.push_back(row);
            agg.add(row);
        }
        aggs.push_back(agg);
    }
    write_output(opt.out, format == "csv" ? sweep_to_csv(var, rows, aggs)
                                          : sweep_to_json(var, rows, aggs));
    return 0;
}

int cmd_threshold(double eps_min, double eps_max, double eps_step, const std::string& out,
                  const std::string& format) {
    if (format == "csv") {
        StringOut csv;
        check(qkd3_threshold_report_csv(eps_min, eps_max, eps_step, &csv.ptr), EXIT_CONFIG);
        write_output(out, csv.str());
        return 0;
    }
    if (format != "json") die(EXIT_CONFIG, "format must be csv or json");
    nlohmann::ordered_json doc;
    doc["format"] = "qkd3.threshold.v1";
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (double e = eps_min; e <= eps_max + 1e-12; e += eps_step) {
        double g2 = 0.0, g3 = 0.0;
        check(qkd3_net_gain(2, e, &g2), EXIT_CONFIG);
        check(qkd3_net_gain(3, e, &g3), EXIT_CONFIG);
        nlohmann::ordered_json row;
        row["eps"] = e;
        row["gain2"] = g2;
        row["gain3"] = g3;
        grid.push_back(row);
    }
    doc["grid"] = grid;
    double t2 = 0.0, t3 = 0.0;
    check(qkd3_solve_threshold(2, &t2), EXIT_CONFIG);
    check(qkd3_solve_threshold(3, &t3), EXIT_CONFIG);
    doc["threshold2"] = t2;
    doc["threshold3"] = t3;
    write_output(out, doc.dump(2) + "\n");
    return 0;
}

int cmd_verify(std::uint32_t max_pairs, bool perturb, std::uint64_t seed, const std::string& out) {
    StringOut report;
    int all_pass = 0;
    const qkd3_status st = qkd3_verify_run(max_pairs, perturb ? 1 : 0, seed, &report.ptr, &all_pass);
    if (st != QKD3_OK && st != QKD3_ERR_CHECK_FAILED)
        die(EXIT_CONFIG, std::string(qkd3_status_name(st)) + ": " + qkd3_last_error());
    write_output(out, report.str());
    if (!all_pass) {
        std::cerr << "qkd3: " << qkd3_last_error() << "\n";
        return EXIT_CERT;
    }
    return 0;
}

int cmd_genmatrix(const ProtocolOptions& opt) {
    if (opt.out.empty()) die(EXIT_CONFIG, "genmatrix needs --out");
    ParamsPtr params = derive_params(opt);
    qkd3_matrix* raw = nullptr;
    check(qkd3_matrix_generate(params.get(), opt.max_tries, opt.seed, &raw), EXIT_MATRIX);
    MatrixPtr matrix(raw, &qkd3_matrix_free);
    StringOut text;
    check(qkd3_matrix_to_text(matrix.get(), &text.ptr), EXIT_CONFIG);
    write_output(opt.out, text.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-basis entangled-pair QKD: simulator, analysis and certification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qkd3_version());

    ProtocolOptions run_opt;
    std::string run_format = "json";
    CLI::App* run = app.add_subcommand("run", "run one protocol session");
    add_protocol_flags(run, run_opt);
    run->add_option("--format", run_format, "json | csv");

    ProtocolOptions sweep_opt;
    std::string sweep_var = "seed";
    std::string sweep_format = "csv";
    std::vector<double> sweep_values;
    std::uint64_t sweep_trials = 100;
    CLI::App* sweep = app.add_subcommand("sweep", "run many sessions, one row per trial");
    add_protocol_flags(sweep, sweep_opt);
    sweep->add_option("--var", sweep_var, "sweep variable: seed | eps | lambda");
    sweep->add_option("--values", sweep_values, "values for eps/lambda sweeps")->delimiter(',');
    sweep->add_option("--trials", sweep_trials, "sessions per swept value");
    sweep->add_option("--format", sweep_format, "csv | json");

    double th_min = 0.005, th_max = 0.2, th_step = 0.005;
    std::string th_out;
    std::string th_format = "csv";
    CLI::App* threshold = app.add_subcommand("threshold", "tabulate net gains and their roots");
    threshold->add_option("--eps-min", th_min, "grid start");
    threshold->add_option("--eps-max", th_max, "grid end");
    threshold->add_option("--step", th_step, "grid step");
    threshold->add_option("--format", th_format, "csv | json");
    threshold->add_option("-o,--out", th_out, "output path (stdout when omitted)");

    std::uint32_t verify_max_pairs = 4;
    bool verify_perturb = false;
    std::uint64_t verify_seed = 1;
    std::string verify_out;
    CLI::App* verify = app.add_subcommand("verify", "certify the security-proof operator bounds");
    verify->add_option("--max-n", verify_max_pairs, "largest pair count in the operator grid (1..5)");
    verify->add_flag("--selftest-perturb", verify_perturb,
                     "corrupt one Bell amplitude sign; the suite must then fail");
    verify->add_option("--seed", verify_seed, "seed for randomized checks");
    verify->add_option("-o,--out", verify_out, "report path (stdout when omitted)");

    ProtocolOptions gen_opt;
    CLI::App* genmatrix = app.add_subcommand("genmatrix", "search and certify a privacy matrix");
    add_protocol_flags(genmatrix, gen_opt, /*with_strategy=*/false);

    for (CLI::App* cmd : {run, sweep, threshold, verify, genmatrix}) add_config_flag(cmd);

    try {
        std::vector<std::string> args = rebuild_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "qkd3: " << e.what() << "\n";
        return EXIT_CONFIG;
    }

    if (run->parsed()) return cmd_run(run_opt, run_format);
    if (sweep->parsed())
        return cmd_sweep(sweep_opt, sweep_var, sweep_values, sweep_trials, sweep_format);
    if (threshold->parsed()) return cmd_threshold(th_min, th_max, th_step, th_out, th_format);
    if (verify->parsed()) return cmd_verify(verify_max_pairs, verify_perturb, verify_seed, verify_out);
    if (genmatrix->parsed()) return cmd_genmatrix(gen_opt);
    return EXIT_CONFIG;
}
