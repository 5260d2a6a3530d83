#ifndef SEQMARK_SEQUENCE_HPP
#define SEQMARK_SEQUENCE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seqmark/error.hpp"

namespace seqmark {

using State = std::uint8_t;
using Position = std::size_t;
using SpId = std::uint32_t;
using Count = std::int64_t;

/// Ordered discrete-state data points of one owner. Values lie in [0, m).
class Sequence {
public:
    Sequence(std::vector<State> points, unsigned states);

    std::size_t size() const noexcept { return points_.size(); }
    unsigned states() const noexcept { return states_; }
    State operator[](Position i) const { return points_[i]; }
    std::span<const State> points() const noexcept { return points_; }

    friend bool operator==(const Sequence&, const Sequence&) = default;

private:
    std::vector<State> points_;
    unsigned states_;
};

/// Fraction of positions left untouched: 1 - hamming(a, b) / length.
double utility(const Sequence& original, const Sequence& released);

std::size_t hamming_distance(std::span<const State> a, std::span<const State> b);

struct WatermarkEntry {
    Position index;
    State from;
    State to;

    friend bool operator==(const WatermarkEntry&, const WatermarkEntry&) = default;
};

/// The set of points changed for one recipient, kept sorted by index.
class WatermarkPattern {
public:
    WatermarkPattern() = default;
    WatermarkPattern(SpId sp_id, std::vector<WatermarkEntry> entries);

    SpId sp_id() const noexcept { return sp_id_; }
    std::span<const WatermarkEntry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    bool contains(Position index) const;
    // True when the pattern changes `index` to exactly `state`.
    bool contains(Position index, State state) const;

    friend bool operator==(const WatermarkPattern&, const WatermarkPattern&) = default;

private:
    SpId sp_id_ = 0;
    std::vector<WatermarkEntry> entries_;
};

/// Applies a pattern on top of `base`; positions not in the pattern keep their value.
Sequence apply_pattern(const Sequence& base, const WatermarkPattern& pattern);

}  // namespace seqmark

#endif  // SEQMARK_SEQUENCE_HPP
