#include <algorithm>
#include <random>

#include "seqmark/harness.hpp"

namespace seqmark {

CorrelationSpec block_correlation_spec(std::size_t length, unsigned states, std::size_t block_size,
                                       double p) {
    if (block_size == 0) throw Error(ErrorKind::InvalidArgument, "block size must be positive");
    CorrelationSpec spec;
    for (Position start = 0; start < length; start += block_size) {
        const Position end = std::min(length, start + block_size);
        for (Position k = start + 1; k < end; ++k) {
            for (unsigned s = 0; s < states; ++s) {
                spec.push_back({k, static_cast<State>(s), start, static_cast<State>(s), p});
            }
        }
    }
    return spec;
}

std::vector<Sequence> generate_synthetic(std::size_t length, unsigned states, std::size_t records,
                                         const CorrelationSpec& spec, std::uint64_t seed) {
    if (length == 0 || records == 0) {
        throw Error(ErrorKind::InvalidArgument, "synthetic data needs positive length and records");
    }
    if (states < 2 || states > 256) throw Error(ErrorKind::InvalidArgument, "bad state count");
    // Group rules by target and order targets so that every source is drawn first.
    std::vector<std::vector<const Correlation*>> rules(length);
    for (const auto& c : spec) {
        if (c.target >= length || c.source >= length || c.target == c.source) {
            throw Error(ErrorKind::InvalidArgument, "correlation rule outside the data");
        }
        if (c.target_state >= states || c.source_state >= states) {
            throw Error(ErrorKind::OutOfRange, "correlation rule state outside the alphabet");
        }
        if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "correlation rule probability outside [0, 1]");
        }
        rules[c.target].push_back(&c);
    }
    for (const auto& r : rules) {
        for (std::size_t a = 0; a < r.size(); ++a) {
            for (std::size_t b = a + 1; b < r.size(); ++b) {
                if (r[a]->source == r[b]->source && r[a]->source_state == r[b]->source_state &&
                    r[a]->target_state != r[b]->target_state &&
                    r[a]->probability + r[b]->probability > 1.0) {
                    throw Error(ErrorKind::InvalidArgument,
                                "contradictory rules for point " + std::to_string(r[a]->target));
                }
            }
        }
    }
    std::vector<std::size_t> indegree(length, 0);
    std::vector<std::vector<Position>> children(length);
    for (Position t = 0; t < length; ++t) {
        std::vector<Position> srcs;
        for (const auto* c : rules[t]) srcs.push_back(c->source);
        std::sort(srcs.begin(), srcs.end());
        srcs.erase(std::unique(srcs.begin(), srcs.end()), srcs.end());
        indegree[t] = srcs.size();
        for (auto s : srcs) children[s].push_back(t);
    }
    std::vector<Position> order;
    for (Position i = 0; i < length; ++i) {
        if (indegree[i] == 0) order.push_back(i);
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        for (auto c : children[order[k]]) {
            if (--indegree[c] == 0) order.push_back(c);
        }
    }
    if (order.size() != length) {
        throw Error(ErrorKind::InvalidArgument, "cyclic correlation rules");
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<unsigned> any(0, states - 1);
    std::uniform_int_distribution<unsigned> other(1, states - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Sequence> out;
    out.reserve(records);
    std::vector<State> row(length);
    for (std::size_t r = 0; r < records; ++r) {
        for (auto i : order) {
            const Correlation* rule = nullptr;
            for (const auto* c : rules[i]) {
                if (row[c->source] == c->source_state) {
                    rule = c;
                    break;
                }
            }
            if (rule == nullptr) {
                row[i] = static_cast<State>(any(rng));
            } else if (unit(rng) < rule->probability) {
                row[i] = rule->target_state;
            } else {
                row[i] = static_cast<State>((rule->target_state + other(rng)) % states);
            }
        }
        out.emplace_back(row, states);
    }
    return out;
}

}  // namespace seqmark
