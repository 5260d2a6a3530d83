#ifndef SEQMARK_EMBEDDER_HPP
#define SEQMARK_EMBEDDER_HPP

#include <cstdint>
#include <functional>
#include <span>

#include "seqmark/allocation.hpp"
#include "seqmark/correlation.hpp"
#include "seqmark/ledger.hpp"

namespace seqmark {

/// Maps (position, original state) to the state a watermark writes there.
using TargetRule = std::function<State(Position, State)>;

/// Default predetermined target: next state up, or one down from the top
/// state. Binary data flips; ternary maps 0->1, 1->2, 2->1.
State default_target(State state, unsigned states);

TargetRule default_target_rule(unsigned states);

struct EmbedResult {
    Sequence data;  // full length; positions outside the index set are untouched
    WatermarkPattern pattern;
};

/// Picks alloc.y[i] points uniformly at random from each count bucket of the
/// shared positions and rewrites them with `rule`.
EmbedResult embed_uncorrelated(const SharingLedger& ledger, std::span<const Position> index_set,
                               const AllocationSolution& alloc, SpId sp_id, std::uint64_t seed,
                               const TargetRule& rule = {});

/// Correlation-preserving insertion. Visits each count bucket in ascending
/// presence probability, moves a point to its most likely state and then
/// propagates that change to strongly correlated partners, spending the
/// per-bucket budgets in `y`. A second pass uses the best alternative state
/// when the first pass leaves budget unspent.
EmbedResult embed_correlated(const SharingLedger& ledger, std::span<const Position> index_set,
                             std::span<const Count> y, const CorrelationModel& model, Count w,
                             SpId sp_id);

}  // namespace seqmark

#endif  // SEQMARK_EMBEDDER_HPP
