#ifndef SEQMARK_LEDGER_HPP
#define SEQMARK_LEDGER_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seqmark/sequence.hpp"

namespace seqmark {

/// n[i] = number of points watermarked exactly i times over h sharings.
struct CountHistogram {
    std::vector<Count> n;

    std::size_t sharings() const noexcept { return n.empty() ? 0 : n.size() - 1; }
    Count length() const;

    friend bool operator==(const CountHistogram&, const CountHistogram&) = default;
};

struct Sharing {
    SpId sp_id;
    std::vector<Position> indices;  // sorted, unique
    WatermarkPattern pattern;
};

/// Append-only history of an owner's sharings. Single writer; const access is
/// safe from concurrent readers.
class SharingLedger {
public:
    explicit SharingLedger(Sequence base);

    const Sequence& base() const noexcept { return base_; }
    std::span<const Sharing> sharings() const noexcept { return sharings_; }
    std::size_t sharing_count() const noexcept { return sharings_.size(); }
    std::span<const std::uint32_t> per_point_counts() const noexcept { return counts_; }

    /// Appends a sharing. Pattern entries must lie inside `index_set` and
    /// carry the owner's original state as `from`.
    void record_sharing(SpId sp_id, std::vector<Position> index_set, WatermarkPattern pattern);

    const Sharing* find(SpId sp_id) const;

    /// Full-length copy as received by the i-th recorded sharing.
    Sequence copy_of(std::size_t sharing) const;

private:
    Sequence base_;
    std::vector<Sharing> sharings_;
    std::vector<std::uint32_t> counts_;
};

CountHistogram counts(const SharingLedger& ledger);

/// Histogram restricted to the given positions (used when a recipient asks
/// for a subset of the data).
CountHistogram counts(const SharingLedger& ledger, std::span<const Position> index_set);

std::vector<Position> full_index_set(std::size_t length);

std::string ledger_to_json(const SharingLedger& ledger);
SharingLedger ledger_from_json(const std::string& text, const Sequence& base);
void save_ledger(const SharingLedger& ledger, const std::filesystem::path& path);
SharingLedger load_ledger(const std::filesystem::path& path, const Sequence& base);

}  // namespace seqmark

#endif  // SEQMARK_LEDGER_HPP
