#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "seqmark/seqmark.hpp"

namespace seqmark {
namespace {

struct Shared {
    SharingLedger ledger;
    std::vector<Sequence> copies;
    std::vector<WatermarkPattern> truth;
};

Shared share_uncorrelated(const Sequence& base, Count w, std::size_t h, std::uint64_t seed) {
    Shared s{SharingLedger(base), {}, {}};
    const auto idx = full_index_set(base.size());
    for (SpId sp = 1; sp <= h; ++sp) {
        const auto alloc = solve_allocation(counts(s.ledger), w);
        auto r = embed_uncorrelated(s.ledger, idx, alloc, sp, seed * 131 + sp);
        s.ledger.record_sharing(sp, idx, r.pattern);
        s.copies.push_back(r.data);
        s.truth.push_back(r.pattern);
    }
    return s;
}

TEST(Posterior, DirectSubstitution) {
    const CountHistogram hist{{10, 5, 3, 2}};
    const auto [pk, po] = collusion_posterior(1, hist);
    EXPECT_DOUBLE_EQ(pk, 5.0 / 8.0);
    EXPECT_DOUBLE_EQ(po, 3.0 / 8.0);
}

TEST(Posterior, SymmetricBuckets) {
    const CountHistogram hist{{4, 7, 7, 4}};
    EXPECT_DOUBLE_EQ(collusion_posterior(1, hist).first, 0.5);
    EXPECT_DOUBLE_EQ(collusion_posterior(0, {{0, 3, 0}}).first, 0.5);
}

TEST(PartialKnowledge, NoHiddenReducesToPosterior) {
    const CountHistogram hist{{10, 5, 3, 2}};
    for (std::size_t k = 0; k <= 3; ++k) {
        const auto s = partial_knowledge_posterior(k, 3, 0, hist);
        ASSERT_EQ(s.size(), 1u);
        EXPECT_DOUBLE_EQ(s[0].weight, 1.0);
        EXPECT_DOUBLE_EQ(s[0].joint_k, collusion_posterior(k, hist).first);
    }
}

TEST(PartialKnowledge, SymmetricHistogramGivesHalf) {
    const CountHistogram hist{{6, 2, 2, 6}};
    for (const auto& s : partial_knowledge_posterior(1, 2, 1, hist)) {
        EXPECT_DOUBLE_EQ(s.p_k, 0.5);
        EXPECT_DOUBLE_EQ(s.p_other, 0.5);
    }
}

TEST(PartialKnowledge, MatchesHiddenValueEnumeration) {
    // Two observed copies split k : 2-k; one hidden copy. Every consistent
    // completion (hidden value joins a side, and one side is the marked one)
    // is weighted by how many columns carry that total count.
    const CountHistogram hist{{9, 4, 3, 1}};
    const std::size_t h = 2, t = 1;
    for (std::size_t k = 0; k <= h; ++k) {
        std::vector<double> wk(t + 1), wo(t + 1);
        double total = 0.0;
        for (std::size_t u = 0; u <= t; ++u) {
            wk[u] = static_cast<double>(hist.n[k + u]);
            wo[u] = static_cast<double>(hist.n[h + t - k - u]);
            total += wk[u] + wo[u];
        }
        const auto s = partial_knowledge_posterior(k, h, t, hist);
        for (std::size_t u = 0; u <= t; ++u) {
            EXPECT_NEAR(s[u].joint_k, wk[u] / total, 1e-12);
            EXPECT_NEAR(s[u].joint_other, wo[u] / total, 1e-12);
        }
    }
}

TEST(Collusion, SingleCopyIsBlindGuess) {
    std::vector<State> v(40, 0);
    const auto s = share_uncorrelated(Sequence(v, 3), 4, 1, 1);
    const auto r = collusion_attack(s.copies, counts(s.ledger), 4);
    for (double c : r.per_position_confidence) EXPECT_DOUBLE_EQ(c, 4.0 / 40.0);
}

TEST(Collusion, IdenticalColumnIsAllOrNone) {
    std::vector<State> v(40, 0);
    const auto s = share_uncorrelated(Sequence(v, 3), 4, 3, 2);
    const auto hist = counts(s.ledger);
    const auto r = collusion_attack(s.copies, hist, 4);
    const double expect = static_cast<double>(hist.n[3]) / static_cast<double>(hist.n[3] + hist.n[0]);
    for (Position j = 0; j < 40; ++j) {
        if (s.copies[0][j] == s.copies[1][j] && s.copies[1][j] == s.copies[2][j]) {
            EXPECT_DOUBLE_EQ(r.per_position_confidence[j], expect);
        }
    }
}

// Colluders guess each column's marked side by sampling their posterior; the
// whole watermark is recovered when every column is guessed right.
double simulate_whole_success(Count len, Count w, std::size_t h, std::size_t trials) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t wins = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto s = share_uncorrelated(Sequence(std::vector<State>(len, 0), 2), w, h, t + 1);
        const auto& n = counts(s.ledger).n;
        const auto per = s.ledger.per_point_counts();
        bool all = true;
        for (Position j = 0; j < static_cast<Position>(len) && all; ++j) {
            const auto c = per[j];
            const double a = static_cast<double>(n[c]);
            const double b = static_cast<double>(n[h - c]);
            const double p = (2 * c == h) ? 0.5 : a / (a + b);
            all = u(rng) < p;
        }
        wins += all;
    }
    return static_cast<double>(wins) / static_cast<double>(trials);
}

TEST(Collusion, MonteCarloMatchesWholeProbability) {
    const Count len = 8, w = 2;
    const std::size_t h = 3, trials = 10'000;
    const auto chain = allocation_chain(len, w, h);
    const double p = std::pow(10.0, chain.back().log10_objective);
    const double freq = simulate_whole_success(len, w, h, trials);
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
    EXPECT_NEAR(freq, p, 3 * sigma + 1e-12);
}

TEST(Collusion, MonteCarloAtDeskScale) {
    // l=100, h=4, r=0.05: the analytic probability is tiny, so the simulated
    // success count must be zero within three standard deviations.
    const auto chain = allocation_chain(100, 5, 4);
    const double p = std::pow(10.0, chain.back().log10_objective);
    const std::size_t trials = 2'000;
    const double freq = simulate_whole_success(100, 5, 4, trials);
    EXPECT_LE(std::abs(freq - p), 3 * std::sqrt(p * (1 - p) / trials) + 1.0 / trials);
}

TEST(Fraction, Endpoints) {
    const CountHistogram hist{{40, 6, 3, 1}};
    EXPECT_DOUBLE_EQ(fraction_inference_probability(hist, 0.0), 1.0);
    EXPECT_NEAR(fraction_inference_probability(hist, 1.0),
                std::pow(10.0, whole_watermark_probability(hist)), 1e-15);
    EXPECT_THROW(fraction_inference_probability(hist, 1.5), Error);
}

TEST(Fraction, ExactAgreesWithMonteCarlo) {
    const CountHistogram hist{{20, 6, 4, 2}};
    FractionOptions mc;
    mc.method = FractionMethod::MonteCarlo;
    mc.trials = 100'000;
    mc.seed = 77;
    for (double f : {0.1, 0.3, 0.5, 0.8, 1.0}) {
        const double p = fraction_inference_probability(hist, f);
        const double q = fraction_inference_probability(hist, f, mc);
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(mc.trials));
        EXPECT_NEAR(q, p, 3 * sigma + 1e-9) << "f=" << f;
    }
}

TEST(Fraction, ExactRefusesLargeInputs) {
    EXPECT_THROW(fraction_inference_probability({{9000, 1000, 500}}, 0.5), Error);
}

TEST(CorrelationAttack, EmptyModelIsPureFallback) {
    const Sequence copy(std::vector<State>(50, 1), 3);
    const auto r = correlation_attack(copy, CorrelationModel{}, 10, 3);
    ASSERT_EQ(r.claims.size(), 10u);
    for (const auto& c : r.claims) {
        EXPECT_FALSE(c.evidence);
        EXPECT_DOUBLE_EQ(c.confidence, 0.2);
    }
    EXPECT_EQ(r.evidence_correct, 0u);
}

TEST(CorrelationAttack, CorrelatedEmbeddingLeavesLessEvidence) {
    const auto spec = block_correlation_spec(100, 3, 3, 0.97);
    const auto corpus = generate_synthetic(100, 3, 1000, spec, 42);
    const auto model = estimate_correlations(corpus, 0.9);
    const auto idx = full_index_set(100);
    double sum_unc = 0.0, sum_cor = 0.0;
    std::size_t m_unc = 0, m_cor = 0;
    for (std::size_t t = 0; t < 100; ++t) {
        SharingLedger ledger(corpus[t]);
        const auto alloc = solve_allocation(counts(ledger), 30);
        const auto a = embed_uncorrelated(ledger, idx, alloc, 1, t);
        const auto b = embed_correlated(ledger, idx, alloc.y, model, 30, 1);
        const auto ra = correlation_attack(a.data, model, 30, t, &a.pattern);
        const auto rb = correlation_attack(b.data, model, 30, t, &b.pattern);
        for (const auto& e : a.pattern.entries()) {
            for (const auto& c : ra.claims) {
                if (c.position == e.index && c.evidence) sum_unc += c.confidence;
            }
        }
        for (const auto& e : b.pattern.entries()) {
            for (const auto& c : rb.claims) {
                if (c.position == e.index && c.evidence) sum_cor += c.confidence;
            }
        }
        m_unc += ra.evidence_correct;
        m_cor += rb.evidence_correct;
    }
    EXPECT_LE(sum_cor, sum_unc);
    EXPECT_LE(m_cor, m_unc);
}

TEST(CombinedAttack, EmptyModelEqualsCollusion) {
    const auto s = share_uncorrelated(Sequence(std::vector<State>(60, 0), 3), 6, 3, 9);
    const auto hist = counts(s.ledger);
    const auto comb = combined_attack(s.copies, CorrelationModel{}, hist, 6, s.truth, 1);
    const auto coll = collusion_attack(s.copies, hist, 6, 0, s.truth);
    EXPECT_EQ(comb.evidence_correct, 0u);
    std::vector<Position> a, b;
    for (const auto& c : comb.claims) a.push_back(c.position);
    for (const auto& c : coll.claims) {
        if (c.copy == comb.target_copy) b.push_back(c.position);
    }
    EXPECT_EQ(a, b);
}

TEST(CombinedAttack, EvidenceNeverExceedsW) {
    const auto spec = block_correlation_spec(60, 3, 3, 0.97);
    const auto corpus = generate_synthetic(60, 3, 300, spec, 5);
    const auto model = estimate_correlations(corpus, 0.9);
    for (std::size_t t = 0; t < 10; ++t) {
        const auto s = share_uncorrelated(corpus[t], 18, 4, t);
        const auto r = combined_attack(s.copies, model, counts(s.ledger), 18, s.truth, t);
        EXPECT_LE(r.evidence_correct, 18u);
        EXPECT_EQ(r.claims.size(), 18u);
    }
}

TEST(InferenceProbability, EvidenceThenFallbackProduct) {
    AttackResult r;
    r.evidence_correct = 2;
    r.claims = {{0, 1, 0.9, true, true}, {0, 2, 0.8, true, true},
                {0, 3, 0.5, false, false}, {0, 4, 0.25, false, false}};
    EXPECT_DOUBLE_EQ(inference_probability(r, 0.5, 4), 1.0);
    EXPECT_DOUBLE_EQ(inference_probability(r, 0.75, 4), 0.5);
    EXPECT_DOUBLE_EQ(inference_probability(r, 1.0, 4), 0.125);
}

TEST(Majority, Rules) {
    const std::vector<Sequence> same = {Sequence({0, 1, 2}, 3), Sequence({0, 1, 2}, 3)};
    EXPECT_EQ(modify_majority(same), same[0]);
    const std::vector<Sequence> three = {Sequence({0}, 3), Sequence({0}, 3), Sequence({1}, 3)};
    EXPECT_EQ(modify_majority(three)[0], 0);
    const std::vector<Sequence> tie = {Sequence({0}, 3), Sequence({1}, 3)};
    EXPECT_EQ(modify_majority(tie)[0], 0);
    const std::vector<Sequence> tie2 = {Sequence({1}, 3), Sequence({0}, 3)};
    EXPECT_EQ(modify_majority(tie2)[0], 1);
}

TEST(Noise, CountAndDistance) {
    const Sequence s(std::vector<State>(100, 1), 3);
    EXPECT_EQ(add_noise(s, 0, 1), s);
    for (std::size_t c : {1u, 10u, 100u}) {
        EXPECT_EQ(hamming_distance(add_noise(s, c, c).points(), s.points()), c);
    }
    EXPECT_THROW(add_noise(s, 101, 1), Error);
}

TEST(Noise, UtilityLossAtPiThirteen) {
    const std::size_t len = 7690;
    const Count w = 385;  // r = 0.05
    const Sequence s(std::vector<State>(len, 0), 3);
    const auto noisy = add_noise(s, noise_count(13, w), 3);
    EXPECT_NEAR(1.0 - utility(s, noisy), 0.65, 0.001);
}

TEST(PartialShareOp, SizesAndSeeds) {
    const Sequence s(std::vector<State>(7690, 2), 3);
    const auto full = partial_share(s, 1.0, 1);
    EXPECT_EQ(full.indices, full_index_set(7690));
    EXPECT_EQ(partial_share(s, 0.37, 1).indices.size(), static_cast<std::size_t>(0.37 * 7690));
    EXPECT_NE(partial_share(s, 0.5, 1).indices, partial_share(s, 0.5, 2).indices);
    const auto half = partial_share(s, 0.5, 1);
    EXPECT_TRUE(std::is_sorted(half.indices.begin(), half.indices.end()));
}

}  // namespace
}  // namespace seqmark
