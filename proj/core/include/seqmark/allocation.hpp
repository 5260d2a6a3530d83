#ifndef SEQMARK_ALLOCATION_HPP
#define SEQMARK_ALLOCATION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "seqmark/ledger.hpp"

namespace seqmark {

/// How many points of each watermark-count bucket receive a new watermark in
/// the next sharing.
///
/// For a histogram with buckets 0..h:
///   y[i] + y_hat[i] = n[i],   sum(y) = w,   y[0] >= 1
///   next[0] = y_hat[0], next[i] = y[i-1] + y_hat[i], next[h+1] = y[h]
struct AllocationSolution {
    std::vector<Count> y;
    std::vector<Count> y_hat;
    CountHistogram next_counts;
    double log10_objective = 0.0;
};

struct SolverOptions {
    // Exhaustive enumeration is used up to this many feasible candidates.
    std::uint64_t exhaustive_limit = 1'000'000;
    unsigned restarts = 32;
    std::uint64_t seed = 0x5eed'a11c;
};

/// log10 of prod_i (n_i / (n_i + n_{H-i}))^{n_i} for a histogram with
/// buckets 0..H. Empty buckets contribute nothing.
double objective_log10(const CountHistogram& hist);

CountHistogram next_histogram(const CountHistogram& hist, std::span<const Count> y);

/// Checks constraints (sum, bounds, y[0] >= 1) of a candidate allocation.
bool is_feasible(const CountHistogram& hist, Count w, std::span<const Count> y);

/// Number of feasible y vectors, saturating at `cap`.
std::uint64_t count_candidates(const CountHistogram& hist, Count w, std::uint64_t cap);

/// Minimises the whole-watermark inference probability of the next sharing.
/// Exact below `exhaustive_limit` candidates, multi-start local search above.
AllocationSolution solve_allocation(const CountHistogram& hist, Count w,
                                    const SolverOptions& options = {});

/// Exhaustive reference solver; ties go to the lexicographically smallest y.
/// Refuses instances with more than 10^7 candidates.
AllocationSolution brute_force_allocation(const CountHistogram& hist, Count w);

struct WeightedAllocation {
    Count w = 0;
    AllocationSolution allocation;
    double weighted_objective = 0.0;
};

/// Minimises beta * probability + (1 - beta) * w over 1 <= w < w_max.
WeightedAllocation solve_allocation_weighted(const CountHistogram& hist, double beta, Count w_max,
                                             const SolverOptions& options = {});

/// Allocations for `sharings` successive full-data sharings of a sequence of
/// `length` points, each with watermark length `w`. Element s is the
/// allocation used for sharing s+1 (computed on the histogram after s sharings).
std::vector<AllocationSolution> allocation_chain(Count length, Count w, std::size_t sharings,
                                                 const SolverOptions& options = {});

}  // namespace seqmark

#endif  // SEQMARK_ALLOCATION_HPP
