#include "seqmark/sequence.hpp"

#include <algorithm>
#include <string>

namespace seqmark {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::OutOfRange: return "out_of_range";
        case ErrorKind::LengthMismatch: return "length_mismatch";
        case ErrorKind::DuplicateSp: return "duplicate_sp";
        case ErrorKind::Infeasible: return "infeasible";
        case ErrorKind::TooLarge: return "too_large";
        case ErrorKind::Insufficient: return "insufficient";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Sequence::Sequence(std::vector<State> points, unsigned states)
    : points_(std::move(points)), states_(states) {
    if (states_ < 2 || states_ > 256) {
        throw Error(ErrorKind::InvalidArgument, "state count must lie in [2, 256]");
    }
    if (points_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "sequence must hold at least one point");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i] >= states_) {
            throw Error(ErrorKind::OutOfRange, "point " + std::to_string(i) + " has state " +
                                                   std::to_string(points_[i]) + " outside [0, " +
                                                   std::to_string(states_ - 1) + "]");
        }
    }
}

std::size_t hamming_distance(std::span<const State> a, std::span<const State> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::LengthMismatch, "hamming distance needs equal lengths");
    }
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

double utility(const Sequence& original, const Sequence& released) {
    const auto d = hamming_distance(original.points(), released.points());
    return 1.0 - static_cast<double>(d) / static_cast<double>(original.size());
}

WatermarkPattern::WatermarkPattern(SpId sp_id, std::vector<WatermarkEntry> entries)
    : sp_id_(sp_id), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const WatermarkEntry& a, const WatermarkEntry& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].from == entries_[i].to) {
            throw Error(ErrorKind::InvalidArgument,
                        "pattern entry at " + std::to_string(entries_[i].index) +
                            " does not change the state");
        }
        if (i > 0 && entries_[i].index == entries_[i - 1].index) {
            throw Error(ErrorKind::InvalidArgument,
                        "pattern index " + std::to_string(entries_[i].index) + " repeated");
        }
    }
}

namespace {
const WatermarkEntry* find_entry(std::span<const WatermarkEntry> entries, Position index) {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const WatermarkEntry& e, Position i) { return e.index < i; });
    return (it != entries.end() && it->index == index) ? &*it : nullptr;
}
}  // namespace

bool WatermarkPattern::contains(Position index) const {
    return find_entry(entries_, index) != nullptr;
}

bool WatermarkPattern::contains(Position index, State state) const {
    const auto* e = find_entry(entries_, index);
    return e != nullptr && e->to == state;
}

Sequence apply_pattern(const Sequence& base, const WatermarkPattern& pattern) {
    std::vector<State> pts(base.points().begin(), base.points().end());
    for (const auto& e : pattern.entries()) {
        if (e.index >= pts.size()) {
            throw Error(ErrorKind::OutOfRange,
                        "pattern index " + std::to_string(e.index) + " beyond sequence");
        }
        pts[e.index] = e.to;
    }
    return Sequence(std::move(pts), base.states());
}

}  // namespace seqmark
