#include <gtest/gtest.h>

#include <cmath>

#include "seqmark/seqmark.hpp"

namespace seqmark {
namespace {

WatermarkPattern marks(SpId sp, const Sequence& base, std::vector<Position> idx) {
    std::vector<WatermarkEntry> e;
    for (auto p : idx) e.push_back({p, base[p], default_target(base[p], base.states())});
    return WatermarkPattern(sp, std::move(e));
}

// Six recipients with disjoint two-point patterns on 20 points.
SharingLedger disjoint_ledger() {
    const Sequence base(std::vector<State>(20, 0), 3);
    SharingLedger ledger(base);
    for (SpId sp = 1; sp <= 6; ++sp) {
        ledger.record_sharing(sp, full_index_set(20),
                              marks(sp, base, {2 * (sp - 1), 2 * (sp - 1) + 1}));
    }
    return ledger;
}

TEST(Extract, OriginalGivesEmptyPattern) {
    const Sequence s({0, 1, 2, 1}, 3);
    EXPECT_TRUE(extract_leak_pattern(s, s).entries.empty());
}

TEST(Extract, FullCopyGivesItsPattern) {
    const auto ledger = disjoint_ledger();
    const auto leak = extract_leak_pattern(ledger.copy_of(2), ledger.base());
    const auto& z = ledger.sharings()[2].pattern;
    ASSERT_EQ(leak.entries.size(), z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        EXPECT_EQ(leak.entries[k].index, z.entries()[k].index);
        EXPECT_EQ(leak.entries[k].state, z.entries()[k].to);
    }
}

TEST(Extract, NoisyLeakMatchesDirectDiff) {
    const auto ledger = disjoint_ledger();
    const auto noisy = add_noise(ledger.copy_of(0), 6, 3);
    std::size_t diff = 0;
    for (Position p = 0; p < 20; ++p) diff += noisy[p] != ledger.base()[p];
    EXPECT_EQ(extract_leak_pattern(noisy, ledger.base()).entries.size(), diff);
}

TEST(Single, CleanLeakNamesItsRecipient) {
    const auto ledger = disjoint_ledger();
    const auto rep = detect_single(extract_leak_pattern(ledger.copy_of(2), ledger.base()), ledger);
    EXPECT_EQ(rep.suspects, (std::vector<SpId>{3}));
    EXPECT_DOUBLE_EQ(rep.scores[2], 2.0);
    EXPECT_FALSE(rep.no_evidence);
}

TEST(Single, NoWatermarkEvidence) {
    const auto ledger = disjoint_ledger();
    const auto rep = detect_single(extract_leak_pattern(ledger.base(), ledger.base()), ledger);
    EXPECT_TRUE(rep.no_evidence);
    EXPECT_TRUE(rep.suspects.empty());
    for (double g : rep.scores) EXPECT_EQ(g, 0.0);
}

Sequence union_leak(const SharingLedger& ledger, std::vector<std::size_t> who) {
    std::vector<State> v(ledger.base().points().begin(), ledger.base().points().end());
    for (auto i : who) {
        for (const auto& e : ledger.sharings()[i].pattern.entries()) v[e.index] = e.to;
    }
    return Sequence(v, ledger.base().states());
}

TEST(Combination, ExactGuessFindsColluders) {
    const auto ledger = disjoint_ledger();
    const auto leak = extract_leak_pattern(union_leak(ledger, {1, 3}), ledger.base());
    const auto rep = detect_combination(leak, ledger, 2);
    EXPECT_EQ(rep.suspects, (std::vector<SpId>{2, 4}));
    ASSERT_FALSE(rep.combinations.empty());
    EXPECT_EQ(rep.combinations.front(), (std::vector<SpId>{2, 4}));
}

TEST(Combination, OverAndUnderGuess) {
    const auto ledger = disjoint_ledger();
    const auto leak = extract_leak_pattern(union_leak(ledger, {0, 2, 4}), ledger.base());
    const std::vector<SpId> truth = {1, 3, 5};
    const std::vector<SpId> all = {1, 2, 3, 4, 5, 6};
    auto over = detect_combination(leak, ledger, 4);
    score_report(over, truth, all);
    EXPECT_DOUBLE_EQ(*over.recall, 1.0);
    auto under = detect_combination(leak, ledger, 2);
    score_report(under, truth, all);
    EXPECT_DOUBLE_EQ(*under.precision, 1.0);
}

TEST(Combination, NoisyLeakStillScores) {
    const auto ledger = disjoint_ledger();
    auto leaked = union_leak(ledger, {1, 3});
    std::vector<State> v(leaked.points().begin(), leaked.points().end());
    v[19] = 2;  // a change nobody's pattern explains
    const auto rep = detect_combination(extract_leak_pattern(Sequence(v, 3), ledger.base()), ledger, 2);
    EXPECT_EQ(rep.suspects, (std::vector<SpId>{2, 4}));
}

TEST(Partial, EntropyOfCandidates) {
    const auto ledger = disjoint_ledger();
    const auto copy = ledger.copy_of(0);
    auto run = [&](std::vector<Position> covered) {
        std::vector<State> vals;
        for (auto p : covered) vals.push_back(copy[p]);
        return partial_leak_candidates(vals, covered, ledger);
    };
    const auto one = run({0, 15});
    EXPECT_EQ(one.suspects, (std::vector<SpId>{1}));
    EXPECT_DOUBLE_EQ(one.entropy_bits, 0.0);
    const auto two = run({2, 19});  // only recipient 2 differs from the original there
    EXPECT_EQ(two.suspects.size(), 5u);
    EXPECT_NEAR(two.entropy_bits, std::log2(5.0), 1e-12);
    const auto all = run({12, 13, 14, 15, 16, 17, 18, 19});  // nobody marks these
    EXPECT_EQ(all.suspects.size(), 6u);
    EXPECT_NEAR(all.entropy_bits, std::log2(6.0), 1e-12);
}

TEST(Partial, TwoCandidatesIsOneBit) {
    const Sequence base(std::vector<State>(6, 0), 2);
    SharingLedger ledger(base);
    ledger.record_sharing(1, full_index_set(6), marks(1, base, {0}));
    ledger.record_sharing(2, full_index_set(6), marks(2, base, {1}));
    const std::vector<Position> covered = {2, 3};
    const std::vector<State> vals = {0, 0};
    const auto rep = partial_leak_candidates(vals, covered, ledger);
    EXPECT_EQ(rep.suspects.size(), 2u);
    EXPECT_DOUBLE_EQ(rep.entropy_bits, 1.0);
}

TEST(Scoring, PrecisionRecall) {
    const std::vector<SpId> all = {1, 2, 3};
    const std::vector<SpId> ab = {1, 2};
    const std::vector<SpId> a = {1};
    auto pr = precision_recall(ab, ab, all);
    EXPECT_DOUBLE_EQ(pr.precision, 1.0);
    EXPECT_DOUBLE_EQ(pr.recall, 1.0);
    pr = precision_recall(a, ab, all);
    EXPECT_DOUBLE_EQ(pr.precision, 1.0);
    EXPECT_DOUBLE_EQ(pr.recall, 0.5);
    pr = precision_recall({}, ab, all);
    EXPECT_DOUBLE_EQ(pr.precision, 0.0);
    EXPECT_DOUBLE_EQ(pr.recall, 0.0);
    pr = precision_recall({}, {}, all);
    EXPECT_DOUBLE_EQ(pr.precision, 1.0);
    EXPECT_TRUE(pr.recall_undefined);
}

}  // namespace
}  // namespace seqmark
