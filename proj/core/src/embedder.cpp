#include "seqmark/embedder.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace seqmark {

State default_target(State state, unsigned states) {
    if (states < 2) throw Error(ErrorKind::InvalidArgument, "need at least two states");
    return state + 1u < states ? static_cast<State>(state + 1) : static_cast<State>(state - 1);
}

TargetRule default_target_rule(unsigned states) {
    return [states](Position, State s) { return default_target(s, states); };
}

namespace {

// Positions of `index_set` grouped by how often they were watermarked.
std::vector<std::vector<Position>> buckets_of(const SharingLedger& ledger,
                                              std::span<const Position> index_set) {
    std::vector<std::vector<Position>> buckets(ledger.sharing_count() + 1);
    const auto pc = ledger.per_point_counts();
    for (auto i : index_set) {
        if (i >= pc.size()) throw Error(ErrorKind::OutOfRange, "index beyond data length");
        buckets[pc[i]].push_back(i);
    }
    for (auto& b : buckets) {
        std::sort(b.begin(), b.end());
        if (std::adjacent_find(b.begin(), b.end()) != b.end()) {
            throw Error(ErrorKind::InvalidArgument, "index set has repeated positions");
        }
    }
    return buckets;
}

void check_budget(const std::vector<std::vector<Position>>& buckets, std::span<const Count> y) {
    if (y.size() != buckets.size()) {
        throw Error(ErrorKind::LengthMismatch, "allocation does not match the ledger's sharings");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || static_cast<std::size_t>(y[i]) > buckets[i].size()) {
            throw Error(ErrorKind::Infeasible,
                        "allocation asks for " + std::to_string(y[i]) + " points of bucket " +
                            std::to_string(i) + " which holds " +
                            std::to_string(buckets[i].size()));
        }
    }
}

EmbedResult finish(const SharingLedger& ledger, std::vector<State> data,
                   std::vector<WatermarkEntry> entries, SpId sp_id) {
    WatermarkPattern pattern(sp_id, std::move(entries));
    return {Sequence(std::move(data), ledger.base().states()), std::move(pattern)};
}

}  // namespace

EmbedResult embed_uncorrelated(const SharingLedger& ledger, std::span<const Position> index_set,
                               const AllocationSolution& alloc, SpId sp_id, std::uint64_t seed,
                               const TargetRule& rule) {
    const auto buckets = buckets_of(ledger, index_set);
    check_budget(buckets, alloc.y);
    const auto& base = ledger.base();
    const TargetRule target = rule ? rule : default_target_rule(base.states());

    std::mt19937_64 rng(seed);
    std::vector<State> data(base.points().begin(), base.points().end());
    std::vector<WatermarkEntry> entries;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
        auto pool = buckets[b];
        const auto take = static_cast<std::size_t>(alloc.y[b]);
        // Partial Fisher-Yates: the first `take` slots become the sample.
        for (std::size_t k = 0; k < take; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
            std::swap(pool[k], pool[pick(rng)]);
            const Position p = pool[k];
            const State to = target(p, base[p]);
            if (to == base[p]) {
                throw Error(ErrorKind::InvalidArgument,
                            "target rule keeps the state of point " + std::to_string(p));
            }
            if (to >= base.states()) {
                throw Error(ErrorKind::OutOfRange, "target rule returned an invalid state");
            }
            data[p] = to;
            entries.push_back({p, base[p], to});
        }
    }
    return finish(ledger, std::move(data), std::move(entries), sp_id);
}

namespace {

class CorrelatedEmbedder {
public:
    CorrelatedEmbedder(const SharingLedger& ledger, std::span<const Position> index_set,
                       std::span<const Count> y, const CorrelationModel& model)
        : ledger_(ledger),
          model_(model),
          buckets_(buckets_of(ledger, index_set)),
          budget_(y.begin(), y.end()),
          data_(ledger.base().points().begin(), ledger.base().points().end()),
          shared_(ledger.base().size(), false),
          changed_(ledger.base().size(), false) {
        check_budget(buckets_, y);
        for (auto i : index_set) shared_[i] = true;
        left_ = std::accumulate(budget_.begin(), budget_.end(), Count{0});
    }

    std::vector<WatermarkEntry> run() {
        pass(false);
        if (left_ > 0) pass(true);
        if (left_ > 0) {
            throw Error(ErrorKind::Insufficient,
                        "insufficient watermarkable points: " + std::to_string(left_) +
                            " watermarks could not be placed");
        }
        std::vector<WatermarkEntry> entries;
        const auto& base = ledger_.base();
        for (Position p = 0; p < data_.size(); ++p) {
            if (changed_[p]) entries.push_back({p, base[p], data_[p]});
        }
        return entries;
    }

    std::vector<State> take_data() { return std::move(data_); }

private:
    double presence(Position p, State s) const {
        return presence_probability(data_, p, s, model_);
    }

    // States ordered by presence, most likely first. Ties keep the current
    // state ahead, then the default target, then ascending state.
    std::vector<State> ranking(Position p) const {
        const unsigned m = ledger_.base().states();
        const State cur = data_[p];
        const State pref = default_target(cur, m);
        std::vector<std::pair<double, State>> scored;
        for (unsigned s = 0; s < m; ++s) scored.emplace_back(presence(p, static_cast<State>(s)), s);
        auto tier = [&](State s) { return s == cur ? 0 : (s == pref ? 1 : 2); };
        std::stable_sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            if (tier(a.second) != tier(b.second)) return tier(a.second) < tier(b.second);
            return a.second < b.second;
        });
        std::vector<State> out;
        for (const auto& [_, s] : scored) out.push_back(s);
        return out;
    }

    void pass(bool fallback) {
        for (std::size_t t = 0; t < buckets_.size() && left_ > 0; ++t) {
            if (budget_[t] == 0) continue;
            std::vector<std::pair<double, Position>> order;
            for (auto p : buckets_[t]) {
                if (!changed_[p]) order.emplace_back(presence(p, data_[p]), p);
            }
            std::sort(order.begin(), order.end());
            for (const auto& [_, p] : order) {
                if (budget_[t] == 0 || left_ == 0) break;
                if (changed_[p]) continue;
                const auto rank = ranking(p);
                State target = rank.front();
                if (fallback) {
                    // Best state other than the current one.
                    target = rank.front() != data_[p] ? rank.front() : rank[1];
                }
                insert(p, target);
            }
        }
    }

    void insert(Position p, State target) {
        if (left_ == 0 || !shared_[p] || changed_[p] || data_[p] == target) return;
        const auto t = ledger_.per_point_counts()[p];
        if (budget_[t] == 0) return;
        data_[p] = target;
        changed_[p] = true;
        --budget_[t];
        --left_;
        // Partners implied by the new state, ascending position; the first
        // (most probable) desired state per partner wins.
        std::vector<std::pair<Position, State>> partners;
        for (const auto& c : model_.given(p, target)) {
            if (!partners.empty() && partners.back().first == c.target) {
                continue;
            }
            partners.emplace_back(c.target, best_desired(p, target, c.target));
        }
        for (const auto& [c, desired] : partners) {
            if (left_ == 0) return;
            insert(c, desired);
        }
    }

    State best_desired(Position source, State state, Position target) const {
        State best = 0;
        double bp = -1.0;
        for (const auto& c : model_.given(source, state)) {
            if (c.target == target && c.probability > bp) {
                bp = c.probability;
                best = c.target_state;
            }
        }
        return best;
    }

    const SharingLedger& ledger_;
    const CorrelationModel& model_;
    std::vector<std::vector<Position>> buckets_;
    std::vector<Count> budget_;
    std::vector<State> data_;
    std::vector<bool> shared_;
    std::vector<bool> changed_;
    Count left_ = 0;
};

}  // namespace

EmbedResult embed_correlated(const SharingLedger& ledger, std::span<const Position> index_set,
                             std::span<const Count> y, const CorrelationModel& model, Count w,
                             SpId sp_id) {
    if (std::accumulate(y.begin(), y.end(), Count{0}) != w) {
        throw Error(ErrorKind::InvalidArgument, "bucket budgets do not sum to the watermark length");
    }
    CorrelatedEmbedder emb(ledger, index_set, y, model);
    auto entries = emb.run();
    return finish(ledger, emb.take_data(), std::move(entries), sp_id);
}

}  // namespace seqmark
