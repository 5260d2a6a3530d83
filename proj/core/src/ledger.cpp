#include "seqmark/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace seqmark {

using nlohmann::json;

namespace {
State state_field(const json& e, const char* key) {
    const auto v = e.at(key).get<unsigned>();
    if (v > 255) throw Error(ErrorKind::OutOfRange, std::string("ledger ") + key + " beyond 255");
    return static_cast<State>(v);
}
}  // namespace

Count CountHistogram::length() const {
    return std::accumulate(n.begin(), n.end(), Count{0});
}

SharingLedger::SharingLedger(Sequence base)
    : base_(std::move(base)), counts_(base_.size(), 0) {}

void SharingLedger::record_sharing(SpId sp_id, std::vector<Position> index_set,
                                   WatermarkPattern pattern) {
    if (find(sp_id) != nullptr) {
        throw Error(ErrorKind::DuplicateSp, "sp id " + std::to_string(sp_id) + " already recorded");
    }
    std::sort(index_set.begin(), index_set.end());
    if (std::adjacent_find(index_set.begin(), index_set.end()) != index_set.end()) {
        throw Error(ErrorKind::InvalidArgument, "index set has repeated positions");
    }
    if (!index_set.empty() && index_set.back() >= base_.size()) {
        throw Error(ErrorKind::OutOfRange,
                    "index " + std::to_string(index_set.back()) + " beyond data length");
    }
    for (const auto& e : pattern.entries()) {
        if (e.index >= base_.size()) {
            throw Error(ErrorKind::OutOfRange,
                        "pattern index " + std::to_string(e.index) + " beyond data length");
        }
        if (!std::binary_search(index_set.begin(), index_set.end(), e.index)) {
            throw Error(ErrorKind::OutOfRange,
                        "pattern index " + std::to_string(e.index) + " outside shared index set");
        }
        if (e.from != base_[e.index]) {
            throw Error(ErrorKind::InvalidArgument,
                        "pattern entry at " + std::to_string(e.index) +
                            " does not start from the original state");
        }
        if (e.to >= base_.states()) {
            throw Error(ErrorKind::OutOfRange,
                        "pattern entry at " + std::to_string(e.index) + " writes an invalid state");
        }
    }
    for (const auto& e : pattern.entries()) ++counts_[e.index];
    sharings_.push_back(Sharing{sp_id, std::move(index_set), std::move(pattern)});
}

const Sharing* SharingLedger::find(SpId sp_id) const {
    for (const auto& s : sharings_) {
        if (s.sp_id == sp_id) return &s;
    }
    return nullptr;
}

Sequence SharingLedger::copy_of(std::size_t sharing) const {
    if (sharing >= sharings_.size()) {
        throw Error(ErrorKind::OutOfRange, "no sharing " + std::to_string(sharing));
    }
    return apply_pattern(base_, sharings_[sharing].pattern);
}

CountHistogram counts(const SharingLedger& ledger) {
    CountHistogram hist;
    hist.n.assign(ledger.sharing_count() + 1, 0);
    for (auto c : ledger.per_point_counts()) ++hist.n[c];
    return hist;
}

CountHistogram counts(const SharingLedger& ledger, std::span<const Position> index_set) {
    CountHistogram hist;
    hist.n.assign(ledger.sharing_count() + 1, 0);
    const auto pc = ledger.per_point_counts();
    for (auto i : index_set) {
        if (i >= pc.size()) throw Error(ErrorKind::OutOfRange, "index beyond data length");
        ++hist.n[pc[i]];
    }
    return hist;
}

std::vector<Position> full_index_set(std::size_t length) {
    std::vector<Position> out(length);
    std::iota(out.begin(), out.end(), Position{0});
    return out;
}

std::string ledger_to_json(const SharingLedger& ledger) {
    json doc;
    doc["length"] = ledger.base().size();
    doc["m"] = ledger.base().states();
    json sharings = json::array();
    for (const auto& s : ledger.sharings()) {
        json pattern = json::array();
        for (const auto& e : s.pattern.entries()) {
            pattern.push_back({{"index", e.index}, {"from", e.from}, {"to", e.to}});
        }
        sharings.push_back({{"sp_id", s.sp_id}, {"indices", s.indices}, {"pattern", pattern}});
    }
    doc["sharings"] = std::move(sharings);
    return doc.dump(1);
}

SharingLedger ledger_from_json(const std::string& text, const Sequence& base) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Parse, std::string("ledger: ") + ex.what());
    }
    try {
        if (doc.at("length").get<std::size_t>() != base.size()) {
            throw Error(ErrorKind::LengthMismatch, "ledger length differs from the data");
        }
        if (doc.at("m").get<unsigned>() != base.states()) {
            throw Error(ErrorKind::InvalidArgument, "ledger state count differs from the data");
        }
        SharingLedger ledger(base);
        for (const auto& s : doc.at("sharings")) {
            std::vector<WatermarkEntry> entries;
            for (const auto& e : s.at("pattern")) {
                entries.push_back({e.at("index").get<Position>(), state_field(e, "from"),
                                   state_field(e, "to")});
            }
            const auto id = s.at("sp_id").get<SpId>();
            ledger.record_sharing(id, s.at("indices").get<std::vector<Position>>(),
                                  WatermarkPattern(id, std::move(entries)));
        }
        return ledger;
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Parse, std::string("ledger: ") + ex.what());
    }
}

void save_ledger(const SharingLedger& ledger, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << ledger_to_json(ledger) << '\n';
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

SharingLedger load_ledger(const std::filesystem::path& path, const Sequence& base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ledger_from_json(ss.str(), base);
}

}  // namespace seqmark
