// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seqmark/seqmark.hpp"

using namespace seqmark;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double metric(const ExperimentResult& r, const std::string& name) {
    const auto v = r.aggregate.lookup(name);
    if (!v) throw std::runtime_error("missing metric " + name);
    return *v;
}

ExperimentConfig base(Scenario s, std::size_t length, double ratio, std::size_t h,
                      std::size_t trials) {
    ExperimentConfig c;
    c.scenario = s;
    c.length = length;
    c.ratio = ratio;
    c.sharings = h;
    c.trials = trials;
    c.seed = 20240601;
    return c;
}

// Table of log10 whole-watermark probabilities after h sharings at full scale.
std::map<std::pair<double, std::size_t>, double> table_values() {
    std::map<std::pair<double, std::size_t>, double> out;
    for (double r : {0.025, 0.05, 0.1}) {
        const auto w = static_cast<Count>(std::llround(r * 7690));
        const auto chain = allocation_chain(7690, w, 10);
        for (std::size_t h : {2u, 4u, 6u, 8u, 10u}) out[{r, h}] = chain[h - 1].log10_objective;
    }
    return out;
}

Outcome first_sharing() {
    double worst = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (Count len : {5, 17, 100, 1000, 7690, 100000}) {
        for (Count w : {Count{1}, len / 40 + 1, len / 10 + 1, len / 2, len - 1}) {
            if (w < 1 || w >= len) continue;
            const double l = static_cast<double>(len), x = static_cast<double>(w);
            const double closed = (l - x) * std::log10((l - x) / l) + x * std::log10(x / l);
            const auto s = solve_allocation({{len}}, w);
            worst = std::max(worst, std::abs(s.log10_objective - closed));
        }
    }
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= 1e-10 && ms < 1000.0,
            "max deviation " + fmt("%.3g", worst) + ", " + fmt("%.1f", ms) + " ms"};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(99);
    SolverOptions local;
    local.exhaustive_limit = 0;  // also exercise the local search path
    std::size_t instances = 0;
    double worst = 0.0;
    while (instances < 200) {
        const Count len = 5 + static_cast<Count>(rng() % 26);
        const std::size_t h = rng() % 5;
        CountHistogram hist{{len}};
        // Random feasible history: each sharing takes a random feasible y.
        bool ok = true;
        for (std::size_t s = 0; s < h && ok; ++s) {
            const Count w = 1 + static_cast<Count>(rng() % 4);
            std::vector<Count> y(hist.n.size(), 0);
            if (hist.n[0] < 1 || w > hist.length()) {
                ok = false;
                break;
            }
            y[0] = 1;
            Count left = w - 1;
            for (int guard = 0; left > 0 && guard < 1000; ++guard) {
                const auto i = rng() % y.size();
                if (y[i] < hist.n[i]) {
                    ++y[i];
                    --left;
                }
            }
            if (left > 0) ok = false;
            else hist = next_histogram(hist, y);
        }
        if (!ok || hist.n[0] < 1) continue;
        const Count w = 1 + static_cast<Count>(rng() % std::min<Count>(4, hist.length()));
        const double ref = brute_force_allocation(hist, w).log10_objective;
        worst = std::max(worst, std::abs(solve_allocation(hist, w).log10_objective - ref));
        worst = std::max(worst, std::abs(solve_allocation(hist, w, local).log10_objective - ref));
        ++instances;
    }
    return {worst <= 1e-9, std::to_string(instances) + " instances, max deviation " + fmt("%.3g", worst)};
}

Outcome table_reproduction(const std::map<std::pair<double, std::size_t>, double>& got) {
    const std::map<std::pair<double, std::size_t>, double> reference = {
        {{0.025, 2}, -199}, {{0.05, 2}, -397}, {{0.1, 2}, -793},
        {{0.025, 4}, -84},  {{0.05, 4}, -166}, {{0.1, 4}, -338},
        {{0.025, 6}, -26},  {{0.05, 6}, -57},  {{0.1, 6}, -110},
        {{0.025, 8}, -7},   {{0.05, 8}, -14},  {{0.1, 8}, -27},
        {{0.025, 10}, -2},  {{0.05, 10}, -5},  {{0.1, 10}, -8}};
    std::size_t within = 0;
    std::ostringstream cells;
    for (const auto& [key, ref] : reference) {
        const double v = got.at(key);
        const double tol = std::max(1.0, 0.15 * std::abs(ref));
        within += std::abs(v - ref) <= tol;
        cells << " (r=" << key.first << ",h=" << key.second << ") " << fmt("%.1f", v) << "/" << ref;
    }
    return {within == reference.size(),
            std::to_string(within) + "/15 cells within tolerance; got/reference:" + cells.str()};
}

Outcome monotonicity(const std::map<std::pair<double, std::size_t>, double>& got) {
    std::vector<std::string> broken;
    const std::vector<double> rs = {0.025, 0.05, 0.1};
    const std::vector<std::size_t> hs = {2, 4, 6, 8, 10};
    for (double r : rs) {
        for (std::size_t k = 1; k < hs.size(); ++k) {
            if (got.at({r, hs[k]}) < got.at({r, hs[k - 1]})) {
                broken.push_back("h " + std::to_string(hs[k - 1]) + "->" + std::to_string(hs[k]) +
                                 " at r=" + fmt("%g", r));
            }
        }
    }
    for (std::size_t h : hs) {
        for (std::size_t k = 1; k < rs.size(); ++k) {
            if (got.at({rs[k], h}) > got.at({rs[k - 1], h})) {
                broken.push_back("r " + fmt("%g", rs[k - 1]) + "->" + fmt("%g", rs[k]) +
                                 " at h=" + std::to_string(h));
            }
        }
    }
    std::string d = broken.empty() ? "all orderings hold" : "violations:";
    for (const auto& b : broken) d += " [" + b + "]";
    return {broken.empty(), d};
}

Outcome fraction_inference() {
    const auto w = static_cast<Count>(std::llround(0.025 * 7690));
    const auto hist = allocation_chain(7690, w, 6).back().next_counts;
    const double p30 = fraction_inference_probability(hist, 0.3);
    const double whole = std::pow(10.0, whole_watermark_probability(hist));
    FractionOptions mc;
    mc.method = FractionMethod::MonteCarlo;
    mc.trials = 10'000;
    mc.seed = 7;
    const double sim = fraction_inference_probability(hist, 1.0, mc);
    const double sigma = std::sqrt(whole * (1 - whole) / 10'000.0);
    const bool ok = p30 < 0.1 && std::abs(sim - whole) <= 3 * sigma;
    return {ok, "P(>30%) = " + fmt("%.3g", p30) + ", whole analytic " + fmt("%.3g", whole) +
                    " vs simulated " + fmt("%.3g", sim)};
}

Outcome partial_knowledge() {
    bool ok = true;
    std::ostringstream d;
    for (std::size_t k : {1u, 2u, 3u, 4u, 5u}) {
        auto c = base(Scenario::PartialKnowledge, 7690, 0.05, 6, 100);
        c.colluders = k;
        const auto r = run_experiment(c);
        std::vector<double> curve;
        for (std::size_t a = k; a <= 6; ++a) {
            curve.push_back(metric(r, "log10_probability@assumed=" + std::to_string(a)));
        }
        bool local = curve.back() < curve.front();
        for (std::size_t i = 1; i < curve.size(); ++i) local = local && curve[i] <= curve[i - 1] + 1e-9;
        // Per trial: the assumption equal to the colluders' own count is best.
        const auto mcol = *r.trials.column_index("metric");
        const auto tcol = *r.trials.column_index("trial");
        const auto vcol = *r.trials.column_index("value");
        std::map<std::string, std::map<std::string, double>> per;
        for (const auto& row : r.trials.rows()) per[row[tcol]][row[mcol]] = std::stod(row[vcol]);
        const auto exact = "log10_probability@assumed=" + std::to_string(k);
        for (const auto& [trial, vals] : per) {
            for (const auto& [name, v] : vals) local = local && v <= vals.at(exact) + 1e-9;
        }
        ok = ok && local;
        d << " colluders=" << k << ":" << (local ? "ok" : "violated") << " ("
          << fmt("%.4f", curve.front()) << " .. " << fmt("%.4f", curve.back()) << ")";
    }
    return {ok, "max at assumed count = colluders, decreasing with hidden sharings;" + d.str()};
}

Outcome correlation_defense() {
    auto c = base(Scenario::Correlation, 100, 0.3, 1, 1000);
    c.fractions = {0.2};
    const double unc = metric(run_experiment(c), "inference_probability@0.2");
    c.embedding = Embedding::Correlated;
    const double cor = metric(run_experiment(c), "inference_probability@0.2");
    return {unc >= 0.9 && cor <= 0.05,
            "f=0.2: uncorrelated " + fmt("%.4f", unc) + ", correlation-aware " + fmt("%.4g", cor)};
}

Outcome combined_defense() {
    auto c = base(Scenario::Combined, 100, 0.3, 6, 1000);
    c.fractions = {0.5};
    const double unc = metric(run_experiment(c), "inference_probability@0.5");
    c.embedding = Embedding::Correlated;
    const double cor = metric(run_experiment(c), "inference_probability@0.5");
    return {unc >= 0.9 && cor <= 0.1,
            "f=0.5: uncorrelated " + fmt("%.4f", unc) + " (need >= 0.9), correlation-aware " +
                fmt("%.4g", cor)};
}

Outcome partial_sharing() {
    bool ok = true;
    std::ostringstream d;
    for (double f : {0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
        auto c = base(Scenario::PartialShare, 7690, 0.2, 4, 1000);
        c.fraction = f;
        const auto r = run_experiment(c);
        const double p = metric(r, "precision"), rc = metric(r, "recall"), h = metric(r, "entropy_bits");
        if (f >= 0.2) ok = ok && rc == 1.0 && p >= 0.95;
        if (f >= 0.05) ok = ok && h <= 0.1;
        d << " f=" << f << ": P=" << fmt("%.3f", p) << " R=" << fmt("%.3f", rc) << " H=" << fmt("%.3f", h);
    }
    return {ok, d.str()};
}

Outcome single_modification() {
    bool ok = true;
    std::ostringstream d;
    for (std::size_t h : {2u, 6u, 10u}) {
        for (double pi : {0.0, 4.0, 8.0, 12.0}) {
            auto c = base(Scenario::ModificationSingle, 7690, 0.05, h, 1000);
            c.pi = pi;
            const auto r = run_experiment(c);
            const double p = metric(r, "precision"), rc = metric(r, "recall");
            ok = ok && p >= 0.95 && rc >= 0.95 && std::abs(p - rc) < 1e-12;
            d << " h=" << h << ",pi=" << pi << ": P=" << fmt("%.3f", p) << " R=" << fmt("%.3f", rc);
        }
    }
    return {ok, d.str()};
}

Outcome collusion_modification() {
    auto c = base(Scenario::ModificationCollusion, 7690, 0.05, 10, 1000);
    c.phi = 5;
    c.phi_hat = 5;
    const auto eq = run_experiment(c);
    c.phi_hat = 7;
    const auto over = run_experiment(c);
    c.phi_hat = 3;
    const auto under = run_experiment(c);
    const double p = metric(eq, "precision"), rc = metric(eq, "recall");
    const double ro = metric(over, "recall"), pu = metric(under, "precision");
    const bool ok = p >= 0.9 && rc >= 0.9 && std::abs(p - rc) < 1e-12 && ro == 1.0 && pu == 1.0;
    return {ok, "phi_hat=phi: P=" + fmt("%.3f", p) + " R=" + fmt("%.3f", rc) +
                    "; phi_hat>phi: R=" + fmt("%.3f", ro) + "; phi_hat<phi: P=" + fmt("%.3f", pu)};
}

Outcome noisy_collusion() {
    auto c = base(Scenario::ModificationCollusion, 7690, 0.05, 10, 1000);
    c.phi = 3;
    c.phi_hat = 3;
    c.pi = 3;
    const auto r = run_experiment(c);
    const double p = metric(r, "precision"), rc = metric(r, "recall"), loss = metric(r, "utility_loss");
    const bool ok = p >= 0.85 && rc >= 0.85 && std::abs(p - rc) < 1e-12 && std::abs(loss - 0.15) <= 1e-3;
    return {ok, "P=" + fmt("%.3f", p) + " R=" + fmt("%.3f", rc) + " utility loss " + fmt("%.5f", loss) +
                    " (pi*r = 0.15)"};
}

Outcome determinism() {
    std::size_t checked = 0;
    std::vector<std::string> differing;
    for (auto s : {Scenario::Collusion, Scenario::PartialKnowledge, Scenario::Correlation,
                   Scenario::Combined, Scenario::PartialShare, Scenario::ModificationSingle,
                   Scenario::ModificationCollusion}) {
        auto c = base(s, 400, 0.1, 4, 20);
        c.colluders = 2;
        c.phi = c.phi_hat = 2;
        c.pi = 1;
        c.fraction = 0.3;
        auto csv = [](const ExperimentConfig& cfg) {
            const auto r = run_experiment(cfg);
            std::ostringstream a;
            write_csv(r.aggregate, a);
            write_csv(r.trials, a);
            return a.str();
        };
        c.workers = 1;
        const auto first = csv(c);
        c.workers = 4;
        const auto second = csv(c);
        const auto third = csv(c);
        ++checked;
        if (first != second || second != third) differing.push_back(to_string(s));
    }
    std::string d = std::to_string(checked) + " scenarios replayed three times (1 and 4 workers)";
    for (const auto& s : differing) d += "; differs: " + s;
    return {differing.empty(), d};
}

}  // namespace

int main() {
    const auto table = table_values();
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, first_sharing},
        {2, oracle_equivalence},
        {3, [&] { return table_reproduction(table); }},
        {4, [&] { return monotonicity(table); }},
        {5, fraction_inference},
        {6, partial_knowledge},
        {7, correlation_defense},
        {8, combined_defense},
        {9, partial_sharing},
        {10, single_modification},
        {11, collusion_modification},
        {12, noisy_collusion},
        {13, determinism},
    };
    int failed = 0;
    for (const auto& [id, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d %s: %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
