#ifndef SEQMARK_ADVERSARY_HPP
#define SEQMARK_ADVERSARY_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seqmark/correlation.hpp"
#include "seqmark/ledger.hpp"

namespace seqmark {

// ---------------------------------------------------------------------------
// Posteriors used by colluding recipients
// ---------------------------------------------------------------------------

/// (p_k, p_{h-k}): probability a column seen k times one way and h-k times
/// the other carries k (resp. h-k) watermarks. (1/2, 1/2) when both buckets
/// are empty.
std::pair<double, double> collusion_posterior(std::size_t k, const CountHistogram& hist);

/// One term of the hidden-sharing marginalisation: the t unseen copies hold
/// u values on the k side.
struct HiddenSplit {
    std::size_t u;
    double weight;         // P_u
    double p_k;            // p_{k+u}
    double p_other;        // p_{h+t-k-u}
    double joint_k;        // P_u * p_{k+u}
    double joint_other;    // P_u * p_{h+t-k-u}
};

/// Colluders with h copies who assume t further unseen sharings. `hist` is
/// the histogram after h+t sharings.
std::vector<HiddenSplit> partial_knowledge_posterior(std::size_t k, std::size_t h, std::size_t t,
                                                     const CountHistogram& hist);

/// Probability that the group of `group_size` copies (out of `observed`) is
/// the watermarked side of a column, marginalised over `hidden` sharings.
double group_watermarked_probability(std::size_t group_size, std::size_t observed,
                                     std::size_t hidden, const CountHistogram& hist);

// ---------------------------------------------------------------------------
// Attacks
// ---------------------------------------------------------------------------

struct Claim {
    std::size_t copy;
    Position position;
    double confidence;
    bool evidence;  // backed by correlation evidence rather than a fallback guess
    bool correct;   // filled when ground truth is supplied
};

struct AttackResult {
    std::vector<Claim> claims;                   // rank order, most confident first
    std::vector<double> per_position_confidence; // per column of the target copy
    std::size_t target_copy = 0;
    std::size_t evidence_correct = 0;            // m: correct evidence-backed claims
    double success_fraction = 0.0;               // against ground truth when supplied
};

/// Collusion attack. Each column's observed values are split into a binary
/// hypothesis (which value group is watermarked), scored by the posterior,
/// and claimed in descending confidence until every copy has w claims.
/// `hidden` > 0 runs the partial-knowledge variant; `hist` must then describe
/// copies.size() + hidden sharings.
AttackResult collusion_attack(std::span<const Sequence> copies, const CountHistogram& hist, Count w,
                              std::size_t hidden = 0,
                              std::span<const WatermarkPattern> truth = {});

/// log10 probability of recovering the whole watermark (the allocation
/// objective evaluated on the histogram after h sharings).
double whole_watermark_probability(const CountHistogram& hist);

/// Per-column success under the colluders' posterior for a column watermarked
/// i times: n_i / (n_i + n_{h-i}).
double column_success_probability(std::size_t times, const CountHistogram& hist);

enum class FractionMethod { Exact, MonteCarlo };

struct FractionOptions {
    FractionMethod method = FractionMethod::Exact;
    std::size_t trials = 100'000;
    std::uint64_t seed = 1;
};

/// Probability that colluders correctly resolve at least ceil(f * W) of the
/// W watermarked columns, each independently with its posterior success.
/// f = 1 means the complete watermark (every column resolved), which equals
/// 10^whole_watermark_probability.
double fraction_inference_probability(const CountHistogram& hist, double f,
                                      const FractionOptions& options = {});

/// Single-copy correlation attack: score = max(p_w - p_n, 0) from partner
/// evidence; positive scores are claimed first, the rest are blind guesses
/// with confidence w / length.
AttackResult correlation_attack(const Sequence& copy, const CorrelationModel& model, Count w,
                                std::uint64_t seed, const WatermarkPattern* truth = nullptr);

/// Every colluder runs the correlation attack; the copy with the most correct
/// detections keeps them (worst case for the owner) and the colluders claim
/// the rest of that copy's watermark with the collusion attack.
AttackResult combined_attack(std::span<const Sequence> copies, const CorrelationModel& model,
                             const CountHistogram& hist, Count w,
                             std::span<const WatermarkPattern> truth, std::uint64_t seed);

/// Probability that the attacker pins down ceil(f * w) watermarked points of
/// its target copy: 1 when the correct evidence-backed claims already reach
/// the target, otherwise the product of confidences of the top fallback
/// claims needed to make up the difference.
double inference_probability(const AttackResult& result, double f, Count w);

/// log10 of the probability the colluders' posterior assigns to the true
/// watermarked group, summed over all columns. `copies[i]` was produced by
/// `truth[i]`.
double log10_truth_probability(std::span<const Sequence> copies,
                               std::span<const WatermarkPattern> truth,
                               const CountHistogram& hist, std::size_t hidden);

// ---------------------------------------------------------------------------
// Modification and partial sharing
// ---------------------------------------------------------------------------

/// Column-wise majority; ties keep the first copy's value.
Sequence modify_majority(std::span<const Sequence> copies);

/// Changes `count` distinct uniformly chosen positions to a uniformly chosen
/// different state.
Sequence add_noise(const Sequence& seq, std::size_t count, std::uint64_t seed);

/// floor(pi * w + 0.5) noise changes for a noise multiplier pi.
std::size_t noise_count(double pi, Count w);

struct PartialShare {
    std::vector<Position> indices;  // sorted
    std::vector<State> values;
};

/// floor(fraction * length) uniformly chosen positions with their values.
PartialShare partial_share(const Sequence& seq, double fraction, std::uint64_t seed);

}  // namespace seqmark

#endif  // SEQMARK_ADVERSARY_HPP
