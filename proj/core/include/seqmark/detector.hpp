#ifndef SEQMARK_DETECTOR_HPP
#define SEQMARK_DETECTOR_HPP

#include <optional>
#include <span>
#include <vector>

#include "seqmark/ledger.hpp"

namespace seqmark {

struct LeakEntry {
    Position index;
    State state;

    friend bool operator==(const LeakEntry&, const LeakEntry&) = default;
};

/// Points of a leak that differ from the owner's original.
struct LeakPattern {
    std::vector<LeakEntry> entries;   // sorted by index
    std::vector<Position> covered;    // sorted positions present in the leak
};

LeakPattern extract_leak_pattern(std::span<const State> leaked_values,
                                 std::span<const Position> covered, const Sequence& original);

LeakPattern extract_leak_pattern(const Sequence& leaked, const Sequence& original);

struct DetectionReport {
    std::vector<SpId> suspects;       // the set S, ascending
    std::vector<SpId> candidates;     // every recipient, ascending
    std::vector<double> scores;       // g per candidate
    std::vector<std::vector<SpId>> combinations;  // surviving subsets, best first
    std::vector<double> combination_scores;
    double entropy_bits = 0.0;
    bool no_evidence = false;
    std::optional<double> precision;
    std::optional<double> recall;
};

/// g_i = |Z_alpha ∩ Z_i| on (position, state); suspect is the argmax with ties
/// to the smallest sp id.
DetectionReport detect_single(const LeakPattern& leak, const SharingLedger& ledger);

/// Scores every phi_hat-subset of recipients by the summed intersections,
/// discarding subsets whose union does not cover the leak pattern (unless
/// that would discard all of them). At most `kept_combinations` subsets are
/// reported. Refuses more than 10^7 subsets.
DetectionReport detect_combination(const LeakPattern& leak, const SharingLedger& ledger,
                                   std::size_t phi_hat, std::size_t kept_combinations = 16);

/// Recipients whose copy agrees with the leak on every covered position;
/// entropy is over a uniform choice among them.
DetectionReport partial_leak_candidates(std::span<const State> leaked_values,
                                        std::span<const Position> covered,
                                        const SharingLedger& ledger);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    bool recall_undefined = false;  // truth was empty
};

PrecisionRecall precision_recall(std::span<const SpId> suspects, std::span<const SpId> truth,
                                 std::span<const SpId> all_sps);

void score_report(DetectionReport& report, std::span<const SpId> truth,
                  std::span<const SpId> all_sps);

}  // namespace seqmark

#endif  // SEQMARK_DETECTOR_HPP
