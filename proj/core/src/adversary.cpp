#include "seqmark/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "seqmark/allocation.hpp"

namespace seqmark {

namespace {

Count bucket(const CountHistogram& hist, std::size_t i) {
    return i < hist.n.size() ? hist.n[i] : 0;
}

// Probability that the side observed `a` times (counting known extras) is
// the watermarked one rather than the side observed `b` times, summed over
// the ways t hidden copies can split between them.
double side_probability(std::size_t a, std::size_t b, std::size_t t, const CountHistogram& hist) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t u = 0; u <= t; ++u) {
        sa += static_cast<double>(bucket(hist, a + u));
        sb += static_cast<double>(bucket(hist, b + t - u));
    }
    return sa + sb > 0.0 ? sa / (sa + sb) : 0.5;
}

void check_copies(std::span<const Sequence> copies) {
    if (copies.empty()) throw Error(ErrorKind::InvalidArgument, "no copies to attack");
    for (const auto& c : copies) {
        if (c.size() != copies.front().size()) {
            throw Error(ErrorKind::LengthMismatch, "copies differ in length");
        }
    }
}

// Value classes of one column: the two largest form the hypothesis pair,
// anything else is known to be watermarked.
struct Column {
    State a_value = 0;
    std::size_t a_size = 0;
    std::optional<State> b_value;
    std::size_t b_size = 0;
    std::size_t extras = 0;
};

Column classify(std::span<const Sequence> copies, Position j) {
    std::vector<std::pair<std::size_t, State>> classes;
    for (const auto& c : copies) {
        auto it = std::find_if(classes.begin(), classes.end(),
                               [&](const auto& p) { return p.second == c[j]; });
        if (it == classes.end()) {
            classes.emplace_back(1, c[j]);
        } else {
            ++it->first;
        }
    }
    std::sort(classes.begin(), classes.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    Column col;
    col.a_value = classes[0].second;
    col.a_size = classes[0].first;
    if (classes.size() > 1) {
        col.b_value = classes[1].second;
        col.b_size = classes[1].first;
    }
    col.extras = copies.size() - col.a_size - col.b_size;
    return col;
}

// conf[c][j]: probability that copy c carries a watermark at column j.
std::vector<std::vector<double>> collusion_confidence(std::span<const Sequence> copies,
                                                      const CountHistogram& hist,
                                                      std::size_t hidden) {
    const std::size_t h = copies.size();
    if (hist.n.size() != h + hidden + 1) {
        throw Error(ErrorKind::LengthMismatch,
                    "histogram must describe " + std::to_string(h + hidden) + " sharings");
    }
    const std::size_t len = copies.front().size();
    std::vector<std::vector<double>> conf(h, std::vector<double>(len, 0.0));
    for (Position j = 0; j < len; ++j) {
        const auto col = classify(copies, j);
        const double pa = side_probability(col.a_size + col.extras, col.b_size + col.extras, hidden,
                                           hist);
        for (std::size_t c = 0; c < h; ++c) {
            const State v = copies[c][j];
            if (v == col.a_value) {
                conf[c][j] = pa;
            } else if (col.b_value && v == *col.b_value) {
                conf[c][j] = 1.0 - pa;
            } else {
                conf[c][j] = 1.0;
            }
        }
    }
    return conf;
}

std::vector<Position> rank_positions(std::span<const double> conf) {
    std::vector<Position> order(conf.size());
    std::iota(order.begin(), order.end(), Position{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Position x, Position y) { return conf[x] > conf[y]; });
    return order;
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::size_t needed(double f, Count w) {
    return static_cast<std::size_t>(std::ceil(f * static_cast<double>(w) - 1e-9));
}

}  // namespace

std::pair<double, double> collusion_posterior(std::size_t k, const CountHistogram& hist) {
    const std::size_t h = hist.sharings();
    if (k > h) throw Error(ErrorKind::OutOfRange, "k exceeds the number of sharings");
    const double p = side_probability(k, h - k, 0, hist);
    return {p, 1.0 - p};
}

std::vector<HiddenSplit> partial_knowledge_posterior(std::size_t k, std::size_t h, std::size_t t,
                                                     const CountHistogram& hist) {
    if (k > h) throw Error(ErrorKind::OutOfRange, "k exceeds the number of observed copies");
    if (hist.n.size() != h + t + 1) {
        throw Error(ErrorKind::LengthMismatch,
                    "histogram must describe " + std::to_string(h + t) + " sharings");
    }
    const std::size_t total = h + t;
    double norm = 0.0;
    for (std::size_t j = 0; j <= t; ++j) {
        norm += static_cast<double>(hist.n[k + j] + hist.n[total - k - j]);
    }
    std::vector<HiddenSplit> out;
    for (std::size_t u = 0; u <= t; ++u) {
        const auto a = static_cast<double>(hist.n[k + u]);
        const auto b = static_cast<double>(hist.n[total - k - u]);
        HiddenSplit s{};
        s.u = u;
        if (norm == 0.0) {
            s.weight = 1.0 / static_cast<double>(t + 1);
            s.p_k = s.p_other = 0.5;
        } else {
            s.weight = (a + b) / norm;
            s.p_k = a + b > 0.0 ? a / (a + b) : 0.5;
            s.p_other = a + b > 0.0 ? b / (a + b) : 0.5;
        }
        s.joint_k = s.weight * s.p_k;
        s.joint_other = s.weight * s.p_other;
        out.push_back(s);
    }
    return out;
}

double group_watermarked_probability(std::size_t group_size, std::size_t observed,
                                     std::size_t hidden, const CountHistogram& hist) {
    double p = 0.0;
    for (const auto& s : partial_knowledge_posterior(group_size, observed, hidden, hist)) {
        p += s.joint_k;
    }
    return p;
}

AttackResult collusion_attack(std::span<const Sequence> copies, const CountHistogram& hist, Count w,
                              std::size_t hidden, std::span<const WatermarkPattern> truth) {
    check_copies(copies);
    if (!truth.empty() && truth.size() != copies.size()) {
        throw Error(ErrorKind::LengthMismatch, "one true pattern per copy expected");
    }
    const auto conf = collusion_confidence(copies, hist, hidden);
    const auto len = copies.front().size();
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max<Count>(w, 0)), len);

    AttackResult res;
    res.per_position_confidence = conf[0];
    double success = 0.0;
    for (std::size_t c = 0; c < copies.size(); ++c) {
        const auto order = rank_positions(conf[c]);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < take; ++r) {
            const Position p = order[r];
            const bool ok = !truth.empty() && truth[c].contains(p);
            correct += ok;
            res.claims.push_back({c, p, conf[c][p], false, ok});
        }
        if (!truth.empty() && truth[c].size() > 0) {
            success += static_cast<double>(correct) / static_cast<double>(truth[c].size());
        }
    }
    std::stable_sort(res.claims.begin(), res.claims.end(),
                     [](const Claim& a, const Claim& b) { return a.confidence > b.confidence; });
    if (!truth.empty()) res.success_fraction = success / static_cast<double>(copies.size());
    return res;
}

double whole_watermark_probability(const CountHistogram& hist) {
    return objective_log10(hist);
}

double column_success_probability(std::size_t times, const CountHistogram& hist) {
    const std::size_t h = hist.sharings();
    if (times > h) throw Error(ErrorKind::OutOfRange, "bucket beyond the histogram");
    return side_probability(times, h - times, 0, hist);
}

double fraction_inference_probability(const CountHistogram& hist, double f,
                                      const FractionOptions& options) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fraction outside [0, 1]");
    if (hist.n.empty()) return 1.0;
    const std::size_t h = hist.sharings();
    Count watermarked = 0;
    for (std::size_t i = 1; i <= h; ++i) watermarked += hist.n[i];
    if (f >= 1.0) {
        if (options.method == FractionMethod::Exact) {
            return std::pow(10.0, whole_watermark_probability(hist));
        }
    }
    const auto need = static_cast<Count>(
        std::ceil(f * static_cast<double>(watermarked) - 1e-9));
    if (need <= 0 && f < 1.0) return 1.0;

    if (options.method == FractionMethod::Exact) {
        if (hist.length() > 10'000) {
            throw Error(ErrorKind::TooLarge, "exact fraction probability limited to 10^4 points");
        }
        // Poisson-binomial over watermarked columns; dist[s] = P(s resolved).
        std::vector<double> dist(static_cast<std::size_t>(watermarked) + 1, 0.0);
        dist[0] = 1.0;
        std::size_t seen = 0;
        for (std::size_t i = 1; i <= h; ++i) {
            const double q = column_success_probability(i, hist);
            for (Count c = 0; c < hist.n[i]; ++c) {
                ++seen;
                for (std::size_t s = seen; s > 0; --s) {
                    dist[s] = dist[s] * (1.0 - q) + dist[s - 1] * q;
                }
                dist[0] *= 1.0 - q;
            }
        }
        double p = 0.0;
        for (auto s = static_cast<std::size_t>(need); s < dist.size(); ++s) p += dist[s];
        return std::min(1.0, p);
    }

    // Monte Carlo: one binomial draw per bucket.
    std::mt19937_64 rng(options.seed);
    std::size_t hits = 0;
    const double q0 = column_success_probability(0, hist);
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        Count resolved = 0;
        for (std::size_t i = 1; i <= h; ++i) {
            if (hist.n[i] == 0) continue;
            std::binomial_distribution<Count> draw(hist.n[i], column_success_probability(i, hist));
            resolved += draw(rng);
        }
        bool ok = resolved >= need;
        if (ok && f >= 1.0 && hist.n[0] > 0) {
            // The complete watermark also needs every clean column resolved.
            std::binomial_distribution<Count> draw(hist.n[0], q0);
            ok = draw(rng) == hist.n[0];
        }
        hits += ok;
    }
    return static_cast<double>(hits) / static_cast<double>(options.trials);
}

AttackResult correlation_attack(const Sequence& copy, const CorrelationModel& model, Count w,
                                std::uint64_t seed, const WatermarkPattern* truth) {
    const auto len = copy.size();
    const auto data = copy.points();
    std::vector<double> score(len, 0.0);
    for (Position i = 0; i < len; ++i) {
        double pw = 0.0, pn = 0.0;
        for (const auto& c : model.about(i)) {
            if (data[c.source] != c.source_state) continue;
            if (c.target_state == data[i]) {
                pn = std::max(pn, c.probability);
            } else {
                pw = std::max(pw, c.probability);
            }
        }
        score[i] = std::clamp(pw - pn, 0.0, 1.0);
    }

    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max<Count>(w, 0)), len);
    const double blind = len > 0 ? static_cast<double>(take) / static_cast<double>(len) : 0.0;
    AttackResult res;
    res.per_position_confidence.resize(len);
    for (Position i = 0; i < len; ++i) {
        res.per_position_confidence[i] = score[i] > 0.0 ? score[i] : blind;
    }

    std::vector<Position> positive;
    std::vector<Position> rest;
    for (Position i = 0; i < len; ++i) (score[i] > 0.0 ? positive : rest).push_back(i);
    std::stable_sort(positive.begin(), positive.end(),
                     [&](Position a, Position b) { return score[a] > score[b]; });
    std::mt19937_64 rng(seed);
    std::shuffle(rest.begin(), rest.end(), rng);

    std::size_t correct = 0;
    for (std::size_t r = 0; r < take; ++r) {
        const bool evidence = r < positive.size();
        const Position p = evidence ? positive[r] : rest[r - positive.size()];
        const bool ok = truth != nullptr && truth->contains(p);
        correct += ok;
        if (evidence && ok) ++res.evidence_correct;
        res.claims.push_back({0, p, evidence ? score[p] : blind, evidence, ok});
    }
    if (truth != nullptr && truth->size() > 0) {
        res.success_fraction = static_cast<double>(correct) / static_cast<double>(truth->size());
    }
    return res;
}

AttackResult combined_attack(std::span<const Sequence> copies, const CorrelationModel& model,
                             const CountHistogram& hist, Count w,
                             std::span<const WatermarkPattern> truth, std::uint64_t seed) {
    check_copies(copies);
    if (!truth.empty() && truth.size() != copies.size()) {
        throw Error(ErrorKind::LengthMismatch, "one true pattern per copy expected");
    }
    // Each colluder attacks its own copy; the best one is kept.
    std::size_t best = 0;
    AttackResult best_corr;
    for (std::size_t c = 0; c < copies.size(); ++c) {
        auto r = correlation_attack(copies[c], model, w, mix(seed + c),
                                    truth.empty() ? nullptr : &truth[c]);
        if (c == 0 || r.evidence_correct > best_corr.evidence_correct) {
            best = c;
            best_corr = std::move(r);
        }
    }

    const auto conf = collusion_confidence(copies, hist, 0);
    const auto len = copies.front().size();
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max<Count>(w, 0)), len);

    AttackResult res;
    res.target_copy = best;
    res.per_position_confidence = conf[best];
    std::vector<bool> kept(len, false);
    for (const auto& cl : best_corr.claims) {
        // With ground truth the attacker keeps only its correct detections.
        if (!cl.evidence || (!truth.empty() && !cl.correct)) continue;
        kept[cl.position] = true;
        res.claims.push_back({best, cl.position, cl.confidence, true, cl.correct});
    }
    res.evidence_correct = truth.empty() ? 0 : res.claims.size();
    for (auto p : rank_positions(conf[best])) {
        if (res.claims.size() >= take) break;
        if (kept[p]) continue;
        const bool ok = !truth.empty() && truth[best].contains(p);
        res.claims.push_back({best, p, conf[best][p], false, ok});
    }
    if (!truth.empty() && truth[best].size() > 0) {
        const auto correct = std::count_if(res.claims.begin(), res.claims.end(),
                                           [](const Claim& c) { return c.correct; });
        res.success_fraction =
            static_cast<double>(correct) / static_cast<double>(truth[best].size());
    }
    return res;
}

double inference_probability(const AttackResult& result, double f, Count w) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fraction outside [0, 1]");
    const auto need = needed(f, w);
    if (result.evidence_correct >= need) return 1.0;
    std::size_t missing = need - result.evidence_correct;
    double p = 1.0;
    for (const auto& c : result.claims) {
        if (missing == 0) break;
        if (c.evidence) continue;
        p *= c.confidence;
        --missing;
    }
    return missing == 0 ? p : 0.0;
}

double log10_truth_probability(std::span<const Sequence> copies,
                               std::span<const WatermarkPattern> truth,
                               const CountHistogram& hist, std::size_t hidden) {
    check_copies(copies);
    if (truth.size() != copies.size()) {
        throw Error(ErrorKind::LengthMismatch, "one true pattern per copy expected");
    }
    const std::size_t h = copies.size();
    if (hist.n.size() != h + hidden + 1) {
        throw Error(ErrorKind::LengthMismatch,
                    "histogram must describe " + std::to_string(h + hidden) + " sharings");
    }
    double acc = 0.0;
    std::vector<bool> marked(h);
    for (Position j = 0; j < copies.front().size(); ++j) {
        const auto col = classify(copies, j);
        for (std::size_t c = 0; c < h; ++c) marked[c] = truth[c].contains(j);
        auto matches = [&](auto&& pred) {
            for (std::size_t c = 0; c < h; ++c) {
                if (marked[c] != pred(copies[c][j])) return false;
            }
            return true;
        };
        const bool is_b = col.b_value.has_value();
        const auto extra = [&](State v) { return v != col.a_value && (!is_b || v != *col.b_value); };
        const double pa =
            side_probability(col.a_size + col.extras, col.b_size + col.extras, hidden, hist);
        double p = 0.0;
        if (matches([&](State v) { return v == col.a_value || extra(v); })) {
            p = pa;
        } else if (matches([&](State v) { return v != col.a_value; })) {
            p = 1.0 - pa;
        }
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log10(p);
    }
    return acc;
}

Sequence modify_majority(std::span<const Sequence> copies) {
    check_copies(copies);
    const auto len = copies.front().size();
    std::vector<State> out(len);
    std::vector<std::size_t> tally(copies.front().states(), 0);
    for (Position j = 0; j < len; ++j) {
        std::fill(tally.begin(), tally.end(), 0);
        for (const auto& c : copies) ++tally[c[j]];
        State best = copies.front()[j];
        for (unsigned s = 0; s < tally.size(); ++s) {
            if (tally[s] > tally[best]) best = static_cast<State>(s);
        }
        out[j] = best;
    }
    return Sequence(std::move(out), copies.front().states());
}

Sequence add_noise(const Sequence& seq, std::size_t count, std::uint64_t seed) {
    if (count > seq.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    "noise count " + std::to_string(count) + " exceeds data length");
    }
    std::mt19937_64 rng(seed);
    std::vector<Position> pos(seq.size());
    std::iota(pos.begin(), pos.end(), Position{0});
    std::vector<State> out(seq.points().begin(), seq.points().end());
    std::uniform_int_distribution<unsigned> other(1, seq.states() - 1);
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, pos.size() - 1);
        std::swap(pos[k], pos[pick(rng)]);
        const Position p = pos[k];
        out[p] = static_cast<State>((out[p] + other(rng)) % seq.states());
    }
    return Sequence(std::move(out), seq.states());
}

std::size_t noise_count(double pi, Count w) {
    if (pi < 0.0) throw Error(ErrorKind::InvalidArgument, "noise multiplier must be non-negative");
    return static_cast<std::size_t>(std::floor(pi * static_cast<double>(w) + 0.5));
}

PartialShare partial_share(const Sequence& seq, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "shared fraction must lie in (0, 1]");
    }
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(seq.size())));
    std::mt19937_64 rng(seed);
    std::vector<Position> pos(seq.size());
    std::iota(pos.begin(), pos.end(), Position{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pos.size() - 1);
        std::swap(pos[i], pos[pick(rng)]);
    }
    pos.resize(k);
    std::sort(pos.begin(), pos.end());
    PartialShare out;
    out.values.reserve(k);
    for (auto p : pos) out.values.push_back(seq[p]);
    out.indices = std::move(pos);
    return out;
}

}  // namespace seqmark
