#include "seqmark/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace seqmark {

LeakPattern extract_leak_pattern(std::span<const State> leaked_values,
                                 std::span<const Position> covered, const Sequence& original) {
    if (leaked_values.size() != covered.size()) {
        throw Error(ErrorKind::LengthMismatch, "one leaked value per covered position expected");
    }
    std::vector<std::pair<Position, State>> pairs;
    pairs.reserve(covered.size());
    for (std::size_t k = 0; k < covered.size(); ++k) {
        if (covered[k] >= original.size()) {
            throw Error(ErrorKind::OutOfRange,
                        "leaked index " + std::to_string(covered[k]) + " outside the original");
        }
        pairs.emplace_back(covered[k], leaked_values[k]);
    }
    std::sort(pairs.begin(), pairs.end());
    LeakPattern out;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (k > 0 && pairs[k].first == pairs[k - 1].first) {
            throw Error(ErrorKind::InvalidArgument, "leaked index repeated");
        }
        out.covered.push_back(pairs[k].first);
        if (pairs[k].second != original[pairs[k].first]) {
            out.entries.push_back({pairs[k].first, pairs[k].second});
        }
    }
    return out;
}

LeakPattern extract_leak_pattern(const Sequence& leaked, const Sequence& original) {
    if (leaked.size() != original.size()) {
        throw Error(ErrorKind::LengthMismatch, "leak and original differ in length");
    }
    const auto idx = full_index_set(leaked.size());
    return extract_leak_pattern(leaked.points(), idx, original);
}

namespace {

struct Ranked {
    std::vector<SpId> ids;      // ascending
    std::vector<std::size_t> order;  // ledger position of ids[k]
};

Ranked ranked_ids(const SharingLedger& ledger) {
    Ranked r;
    const auto sh = ledger.sharings();
    r.order.resize(sh.size());
    for (std::size_t k = 0; k < sh.size(); ++k) r.order[k] = k;
    std::sort(r.order.begin(), r.order.end(),
              [&](std::size_t a, std::size_t b) { return sh[a].sp_id < sh[b].sp_id; });
    for (auto k : r.order) r.ids.push_back(sh[k].sp_id);
    return r;
}

// Bit k of hits[j] says whether leak entry k lies in the j-th ranked pattern.
struct Intersections {
    std::vector<std::vector<std::uint64_t>> hits;
    std::vector<double> g;
};

Intersections intersect(const LeakPattern& leak, const SharingLedger& ledger, const Ranked& r) {
    const std::size_t words = (leak.entries.size() + 63) / 64;
    Intersections out;
    for (auto k : r.order) {
        const auto& pattern = ledger.sharings()[k].pattern;
        std::vector<std::uint64_t> bits(words, 0);
        std::size_t g = 0;
        for (std::size_t e = 0; e < leak.entries.size(); ++e) {
            if (pattern.contains(leak.entries[e].index, leak.entries[e].state)) {
                bits[e / 64] |= std::uint64_t{1} << (e % 64);
                ++g;
            }
        }
        out.hits.push_back(std::move(bits));
        out.g.push_back(static_cast<double>(g));
    }
    return out;
}

std::uint64_t choose(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double acc = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (acc > static_cast<long double>(cap)) return cap + 1;
    }
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(acc)));
}

}  // namespace

DetectionReport detect_single(const LeakPattern& leak, const SharingLedger& ledger) {
    if (ledger.sharing_count() == 0) throw Error(ErrorKind::InvalidArgument, "empty ledger");
    const auto r = ranked_ids(ledger);
    const auto inter = intersect(leak, ledger, r);
    DetectionReport rep;
    rep.candidates = r.ids;
    rep.scores = inter.g;
    const auto best = std::max_element(inter.g.begin(), inter.g.end());
    if (*best <= 0.0) {
        rep.no_evidence = true;
        return rep;
    }
    rep.suspects = {r.ids[static_cast<std::size_t>(best - inter.g.begin())]};
    return rep;
}

DetectionReport detect_combination(const LeakPattern& leak, const SharingLedger& ledger,
                                   std::size_t phi_hat, std::size_t kept_combinations) {
    const std::size_t h = ledger.sharing_count();
    if (h == 0) throw Error(ErrorKind::InvalidArgument, "empty ledger");
    if (phi_hat < 1 || phi_hat > h) {
        throw Error(ErrorKind::InvalidArgument, "combination size must lie in [1, h]");
    }
    constexpr std::uint64_t kGuard = 10'000'000;
    if (choose(h, phi_hat, kGuard) > kGuard) {
        throw Error(ErrorKind::TooLarge, "more than 10^7 combinations");
    }
    const auto r = ranked_ids(ledger);
    const auto inter = intersect(leak, ledger, r);
    DetectionReport rep;
    rep.candidates = r.ids;
    rep.scores = inter.g;

    const std::size_t n_entries = leak.entries.size();
    const std::size_t words = inter.hits.empty() ? 0 : inter.hits.front().size();
    auto covers = [&](const std::vector<std::size_t>& combo) {
        for (std::size_t wd = 0; wd < words; ++wd) {
            std::uint64_t acc = 0;
            for (auto j : combo) acc |= inter.hits[j][wd];
            const std::size_t bits = std::min<std::size_t>(64, n_entries - wd * 64);
            const std::uint64_t full = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
            if (acc != full) return false;
        }
        return true;
    };

    struct Scored {
        double score;
        std::vector<std::size_t> combo;
    };
    auto run = [&](bool eliminate) {
        std::vector<Scored> top;
        std::vector<std::size_t> combo(phi_hat);
        for (std::size_t k = 0; k < phi_hat; ++k) combo[k] = k;
        while (true) {
            if (!eliminate || covers(combo)) {
                double s = 0.0;
                for (auto j : combo) s += inter.g[j];
                // Lexicographic enumeration: earlier combos win ties.
                auto pos = std::upper_bound(top.begin(), top.end(), s,
                                            [](double v, const Scored& x) { return v > x.score; });
                if (static_cast<std::size_t>(pos - top.begin()) < kept_combinations) {
                    top.insert(pos, Scored{s, combo});
                    if (top.size() > kept_combinations) top.pop_back();
                }
            }
            std::size_t i = phi_hat;
            while (i > 0 && combo[i - 1] == h - phi_hat + i - 1) --i;
            if (i == 0) break;
            ++combo[i - 1];
            for (std::size_t k = i; k < phi_hat; ++k) combo[k] = combo[k - 1] + 1;
        }
        return top;
    };
    auto top = run(true);
    if (top.empty()) top = run(false);  // noise outside every union

    for (const auto& t : top) {
        std::vector<SpId> ids;
        for (auto j : t.combo) ids.push_back(r.ids[j]);
        rep.combinations.push_back(std::move(ids));
        rep.combination_scores.push_back(t.score);
    }
    if (top.empty() || top.front().score <= 0.0) {
        rep.no_evidence = true;
        return rep;
    }
    rep.suspects = rep.combinations.front();
    return rep;
}

DetectionReport partial_leak_candidates(std::span<const State> leaked_values,
                                        std::span<const Position> covered,
                                        const SharingLedger& ledger) {
    if (ledger.sharing_count() == 0) throw Error(ErrorKind::InvalidArgument, "empty ledger");
    const auto leak = extract_leak_pattern(leaked_values, covered, ledger.base());
    const auto r = ranked_ids(ledger);
    const auto inter = intersect(leak, ledger, r);
    DetectionReport rep;
    rep.candidates = r.ids;
    rep.scores = inter.g;
    const auto& base = ledger.base();
    for (std::size_t j = 0; j < r.order.size(); ++j) {
        const auto& pattern = ledger.sharings()[r.order[j]].pattern;
        bool match = true;
        for (std::size_t k = 0; k < covered.size() && match; ++k) {
            const Position p = covered[k];
            match = pattern.contains(p) ? pattern.contains(p, leaked_values[k])
                                        : leaked_values[k] == base[p];
        }
        if (match) rep.suspects.push_back(r.ids[j]);
    }
    if (rep.suspects.empty()) {
        rep.no_evidence = true;
    } else {
        rep.entropy_bits = std::log2(static_cast<double>(rep.suspects.size()));
    }
    return rep;
}

PrecisionRecall precision_recall(std::span<const SpId> suspects, std::span<const SpId> truth,
                                 std::span<const SpId> all_sps) {
    auto in = [](std::span<const SpId> set, SpId id) {
        return std::find(set.begin(), set.end(), id) != set.end();
    };
    for (auto s : suspects) {
        if (!all_sps.empty() && !in(all_sps, s)) {
            throw Error(ErrorKind::InvalidArgument, "suspect " + std::to_string(s) + " unknown");
        }
    }
    for (auto t : truth) {
        if (!all_sps.empty() && !in(all_sps, t)) {
            throw Error(ErrorKind::InvalidArgument, "true leaker " + std::to_string(t) + " unknown");
        }
    }
    std::size_t both = 0;
    for (auto s : suspects) both += in(truth, s);
    PrecisionRecall pr;
    if (suspects.empty()) {
        pr.precision = truth.empty() ? 1.0 : 0.0;
    } else {
        pr.precision = static_cast<double>(both) / static_cast<double>(suspects.size());
    }
    if (truth.empty()) {
        pr.recall = 1.0;
        pr.recall_undefined = true;
    } else {
        pr.recall = static_cast<double>(both) / static_cast<double>(truth.size());
    }
    return pr;
}

void score_report(DetectionReport& report, std::span<const SpId> truth,
                  std::span<const SpId> all_sps) {
    const auto pr = precision_recall(report.suspects, truth, all_sps);
    report.precision = pr.precision;
    report.recall = pr.recall;
}

}  // namespace seqmark
