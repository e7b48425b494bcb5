#include "adversary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qkd3::adversary {

namespace {

void validate(const EveStrategy& s) {
    switch (s.kind) {
        case StrategyKind::Honest:
            break;
        case StrategyKind::InterceptResend: {
            if (s.bases.empty()) throw std::invalid_argument("intercept strategy: basis set must be nonempty");
            for (int b : s.bases)
                if (b < 0 || b > 2) throw std::invalid_argument("intercept strategy: bases must be in {0,1,2}");
            std::vector<int> sorted = s.bases;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw std::invalid_argument("intercept strategy: duplicate basis");
            break;
        }
        case StrategyKind::BellDiagonal: {
            double sum = 0.0;
            for (double p : s.bell_p) {
                if (p < 0.0) throw std::invalid_argument("belldiag strategy: probabilities must be nonnegative");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("belldiag strategy: probabilities must sum to 1");
            break;
        }
    }
}

std::string strip_spaces(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

std::vector<std::string> split_list(const std::string& body) {
    std::vector<std::string> items;
    std::string cur;
    for (char c : body) {
        if (c == ',') {
            items.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() || !items.empty()) items.push_back(cur);
    return items;
}

// extracts the "[...]" payload of "name{key=[...]}"
std::string bracket_payload(const std::string& spec, const std::string& prefix) {
    if (spec.size() < prefix.size() + 2 || spec.compare(0, prefix.size(), prefix) != 0 ||
        spec.back() != '}')
        throw std::invalid_argument("strategy spec: expected " + prefix + "...]}");
    std::string body = spec.substr(prefix.size(), spec.size() - prefix.size() - 1);
    if (body.empty() || body.back() != ']')
        throw std::invalid_argument("strategy spec: expected closing ']' in " + spec);
    body.pop_back();
    return body;
}

}  // namespace

EveStrategy EveStrategy::honest() { return EveStrategy{}; }

EveStrategy EveStrategy::intercept_resend(std::vector<int> bases) {
    EveStrategy s;
    s.kind = StrategyKind::InterceptResend;
    s.bases = std::move(bases);
    validate(s);
    return s;
}

EveStrategy EveStrategy::bell_diagonal(const std::array<double, 4>& p) {
    EveStrategy s;
    s.kind = StrategyKind::BellDiagonal;
    s.bell_p = p;
    validate(s);
    return s;
}

EveStrategy EveStrategy::parse(const std::string& raw) {
    const std::string spec = strip_spaces(raw);
    if (spec == "honest") return honest();
    if (spec.rfind("intercept{", 0) == 0) {
        const std::string body = bracket_payload(spec, "intercept{bases=[");
        std::vector<int> bases;
        for (const std::string& item : split_list(body)) {
            if (item.size() != 1 || item[0] < '0' || item[0] > '2')
                throw std::invalid_argument("strategy spec: bases must be 0, 1 or 2");
            bases.push_back(item[0] - '0');
        }
        return intercept_resend(std::move(bases));
    }
    if (spec.rfind("belldiag{", 0) == 0) {
        const std::string body = bracket_payload(spec, "belldiag{p=[");
        const std::vector<std::string> items = split_list(body);
        if (items.size() != 4)
            throw std::invalid_argument("strategy spec: belldiag needs exactly four probabilities");
        std::array<double, 4> p{};
        for (int j = 0; j < 4; ++j) {
            std::size_t pos = 0;
            p[j] = std::stod(items[j], &pos);
            if (pos != items[j].size())
                throw std::invalid_argument("strategy spec: bad probability '" + items[j] + "'");
        }
        return bell_diagonal(p);
    }
    throw std::invalid_argument("strategy spec: expected honest | intercept{bases=[...]} | belldiag{p=[...]}");
}

std::string EveStrategy::to_spec() const {
    switch (kind) {
        case StrategyKind::Honest:
            return "honest";
        case StrategyKind::InterceptResend: {
            std::ostringstream out;
            out << "intercept{bases=[";
            for (std::size_t i = 0; i < bases.size(); ++i) out << (i ? "," : "") << bases[i];
            out << "]}";
            return out.str();
        }
        case StrategyKind::BellDiagonal: {
            std::ostringstream out;
            out << "belldiag{p=[";
            for (int j = 0; j < 4; ++j) out << (j ? "," : "") << bell_p[j];
            out << "]}";
            return out.str();
        }
    }
    return {};
}

EmittedPair emit_pair(const EveStrategy& strategy, RngStream& rng) {
    EmittedPair out;
    switch (strategy.kind) {
        case StrategyKind::Honest:
            out.state = qcore::bell_ket(0);
            break;
        case StrategyKind::InterceptResend: {
            const int e = strategy.bases[rng.next_below(static_cast<std::uint32_t>(strategy.bases.size()))];
            const int g = rng.next_bit();
            out.state = qcore::product_pair(qcore::basis_ket(e, g), qcore::basis_ket(e, 1 - g));
            out.view.eve_basis = e;
            out.view.eve_bit = g;
            break;
        }
        case StrategyKind::BellDiagonal: {
            const double u = rng.next_double();
            double acc = 0.0;
            int j = 0;
            for (; j < 3; ++j) {
                acc += strategy.bell_p[j];
                if (u < acc) break;
            }
            out.state = qcore::bell_ket(j);
            out.view.bell_index = j;
            break;
        }
    }
    return out;
}

double expected_error_rate(const EveStrategy& strategy) {
    validate(strategy);
    switch (strategy.kind) {
        case StrategyKind::Honest:
            return 0.0;
        case StrategyKind::InterceptResend:
            // matching guess: no error; mismatched (mutually unbiased): 1/2.
            // P(guess matches the common basis) = 1/3 for any basis set.
            return 1.0 / 3.0;
        case StrategyKind::BellDiagonal:
            return (2.0 / 3.0) * (1.0 - strategy.bell_p[0]);
    }
    return 0.0;
}

std::array<double, 3> expected_error_rate_per_basis(const EveStrategy& strategy) {
    validate(strategy);
    std::array<double, 3> rates{};
    switch (strategy.kind) {
        case StrategyKind::Honest:
            break;
        case StrategyKind::InterceptResend: {
            const double inv = 1.0 / static_cast<double>(strategy.bases.size());
            for (int a = 0; a < 3; ++a) {
                const bool in_set = std::find(strategy.bases.begin(), strategy.bases.end(), a) !=
                                    strategy.bases.end();
                rates[a] = 0.5 * (1.0 - (in_set ? inv : 0.0));
            }
            break;
        }
        case StrategyKind::BellDiagonal:
            for (int a = 0; a < 3; ++a) {
                for (int j : qcore::bell_y_set(a)) rates[a] += strategy.bell_p[j];
            }
            break;
    }
    return rates;
}

}  // namespace qkd3::adversary
