#ifndef SEQMARK_CORRELATION_HPP
#define SEQMARK_CORRELATION_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seqmark/sequence.hpp"

namespace seqmark {

/// Pr(x_target = target_state | x_source = source_state).
struct Correlation {
    Position target;
    State target_state;
    Position source;
    State source_state;
    double probability;

    friend bool operator==(const Correlation&, const Correlation&) = default;
};

/// Pairwise conditional probabilities above a threshold tau. Entries are
/// directional: (i,a | j,b) says nothing about (j,b | i,a).
class CorrelationModel {
public:
    CorrelationModel() = default;
    CorrelationModel(std::vector<Correlation> entries, double tau);

    double tau() const noexcept { return tau_; }
    bool empty() const noexcept { return by_source_.empty(); }
    std::size_t size() const noexcept { return by_source_.size(); }

    /// All entries ordered by (source, source_state, target, target_state).
    std::span<const Correlation> entries() const noexcept { return by_source_; }

    /// Entries implied by x_source = state, ascending by target position.
    std::span<const Correlation> given(Position source, State state) const;

    /// Entries whose target is x_target = state.
    std::span<const Correlation> about(Position target, State state) const;

    /// Entries whose target is position `target`, any state.
    std::span<const Correlation> about(Position target) const;

private:
    double tau_ = 0.9;
    std::vector<Correlation> by_source_;
    std::vector<Correlation> by_target_;
};

/// Empirical conditional frequencies over a corpus of equal-length records;
/// keeps (i,a | j,b) for i != j when the frequency exceeds tau.
CorrelationModel estimate_correlations(std::span<const Sequence> corpus, double tau);

/// Product of Pr(x_index = state | x_c = data[c]) over model entries whose
/// source state matches the data. Empty product is 1.
double presence_probability(std::span<const State> data, Position index, State state,
                            const CorrelationModel& model);

std::string model_to_json(const CorrelationModel& model);
CorrelationModel model_from_json(const std::string& text, double tau);
void save_model(const CorrelationModel& model, const std::filesystem::path& path);
CorrelationModel load_model(const std::filesystem::path& path, double tau);

}  // namespace seqmark

#endif  // SEQMARK_CORRELATION_HPP
