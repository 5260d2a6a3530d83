#include "seqmark/correlation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace seqmark {

using nlohmann::json;

namespace {

auto source_key(const Correlation& c) {
    return std::tie(c.source, c.source_state, c.target, c.target_state);
}

auto target_key(const Correlation& c) {
    return std::tie(c.target, c.target_state, c.source, c.source_state);
}

}  // namespace

CorrelationModel::CorrelationModel(std::vector<Correlation> entries, double tau)
    : tau_(tau), by_source_(std::move(entries)) {
    for (const auto& c : by_source_) {
        if (c.target == c.source) {
            throw Error(ErrorKind::InvalidArgument, "correlation of a point with itself");
        }
        if (!(c.probability > tau_ && c.probability <= 1.0)) {
            throw Error(ErrorKind::InvalidArgument,
                        "correlation probability " + std::to_string(c.probability) +
                            " outside (tau, 1]");
        }
    }
    std::sort(by_source_.begin(), by_source_.end(),
              [](const Correlation& a, const Correlation& b) { return source_key(a) < source_key(b); });
    for (std::size_t i = 1; i < by_source_.size(); ++i) {
        if (source_key(by_source_[i]) == source_key(by_source_[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "duplicate correlation entry");
        }
    }
    by_target_ = by_source_;
    std::sort(by_target_.begin(), by_target_.end(),
              [](const Correlation& a, const Correlation& b) { return target_key(a) < target_key(b); });
}

std::span<const Correlation> CorrelationModel::given(Position source, State state) const {
    auto lo = std::lower_bound(by_source_.begin(), by_source_.end(), std::pair{source, state},
                               [](const Correlation& c, const std::pair<Position, State>& k) {
                                   return std::pair{c.source, c.source_state} < k;
                               });
    auto hi = std::upper_bound(lo, by_source_.end(), std::pair{source, state},
                               [](const std::pair<Position, State>& k, const Correlation& c) {
                                   return k < std::pair{c.source, c.source_state};
                               });
    return {lo, hi};
}

std::span<const Correlation> CorrelationModel::about(Position target, State state) const {
    auto lo = std::lower_bound(by_target_.begin(), by_target_.end(), std::pair{target, state},
                               [](const Correlation& c, const std::pair<Position, State>& k) {
                                   return std::pair{c.target, c.target_state} < k;
                               });
    auto hi = std::upper_bound(lo, by_target_.end(), std::pair{target, state},
                               [](const std::pair<Position, State>& k, const Correlation& c) {
                                   return k < std::pair{c.target, c.target_state};
                               });
    return {lo, hi};
}

std::span<const Correlation> CorrelationModel::about(Position target) const {
    auto lo = std::lower_bound(by_target_.begin(), by_target_.end(), target,
                               [](const Correlation& c, Position t) { return c.target < t; });
    auto hi = std::upper_bound(lo, by_target_.end(), target,
                               [](Position t, const Correlation& c) { return t < c.target; });
    return {lo, hi};
}

CorrelationModel estimate_correlations(std::span<const Sequence> corpus, double tau) {
    if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "empty corpus");
    const std::size_t len = corpus.front().size();
    const unsigned m = corpus.front().states();
    for (const auto& s : corpus) {
        if (s.size() != len) throw Error(ErrorKind::LengthMismatch, "ragged corpus");
        if (s.states() != m) throw Error(ErrorKind::InvalidArgument, "mixed state counts");
    }
    // Column-major copy keeps the pair scan cache friendly.
    std::vector<State> col(len * corpus.size());
    for (std::size_t r = 0; r < corpus.size(); ++r) {
        for (std::size_t i = 0; i < len; ++i) col[i * corpus.size() + r] = corpus[r][i];
    }
    const std::size_t rows = corpus.size();
    std::vector<Correlation> out;
    std::vector<std::size_t> joint(m * m);
    std::vector<std::size_t> cond(m);
    for (Position j = 0; j < len; ++j) {
        const State* xj = &col[j * rows];
        std::fill(cond.begin(), cond.end(), 0);
        for (std::size_t r = 0; r < rows; ++r) ++cond[xj[r]];
        for (Position i = 0; i < len; ++i) {
            if (i == j) continue;
            const State* xi = &col[i * rows];
            std::fill(joint.begin(), joint.end(), 0);
            for (std::size_t r = 0; r < rows; ++r) ++joint[xi[r] * m + xj[r]];
            for (unsigned b = 0; b < m; ++b) {
                if (cond[b] == 0) continue;
                for (unsigned a = 0; a < m; ++a) {
                    const double p = static_cast<double>(joint[a * m + b]) /
                                     static_cast<double>(cond[b]);
                    if (p > tau) {
                        out.push_back({i, static_cast<State>(a), j, static_cast<State>(b), p});
                    }
                }
            }
        }
    }
    return CorrelationModel(std::move(out), tau);
}

double presence_probability(std::span<const State> data, Position index, State state,
                            const CorrelationModel& model) {
    if (index >= data.size()) throw Error(ErrorKind::OutOfRange, "index beyond data length");
    double p = 1.0;
    for (const auto& c : model.about(index, state)) {
        if (c.source < data.size() && data[c.source] == c.source_state) p *= c.probability;
    }
    return p;
}

std::string model_to_json(const CorrelationModel& model) {
    json arr = json::array();
    for (const auto& c : model.entries()) {
        arr.push_back({{"i", c.target},
                       {"a", c.target_state},
                       {"j", c.source},
                       {"b", c.source_state},
                       {"p", c.probability}});
    }
    return arr.dump(1);
}

CorrelationModel model_from_json(const std::string& text, double tau) {
    try {
        const auto arr = json::parse(text);
        std::vector<Correlation> entries;
        for (const auto& e : arr) {
            const auto a = e.at("a").get<unsigned>();
            const auto b = e.at("b").get<unsigned>();
            if (a > 255 || b > 255) throw Error(ErrorKind::OutOfRange, "model state beyond 255");
            Correlation c{e.at("i").get<Position>(), static_cast<State>(a),
                          e.at("j").get<Position>(), static_cast<State>(b),
                          e.at("p").get<double>()};
            // Entries at or below the requested threshold are dropped.
            if (c.probability > tau) entries.push_back(c);
        }
        return CorrelationModel(std::move(entries), tau);
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Parse, std::string("model: ") + ex.what());
    }
}

void save_model(const CorrelationModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << model_to_json(model) << '\n';
}

CorrelationModel load_model(const std::filesystem::path& path, double tau) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str(), tau);
}

}  // namespace seqmark
