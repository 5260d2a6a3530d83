#include "seqmark/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace seqmark {

namespace {

constexpr double kTieTolerance = 1e-12;

void check_instance(const CountHistogram& hist, Count w) {
    if (hist.n.empty()) throw Error(ErrorKind::InvalidArgument, "empty histogram");
    for (auto v : hist.n) {
        if (v < 0) throw Error(ErrorKind::InvalidArgument, "negative bucket count");
    }
    if (w < 1) throw Error(ErrorKind::Infeasible, "watermark length must be positive");
    if (w > hist.length()) {
        throw Error(ErrorKind::Infeasible, "watermark length " + std::to_string(w) +
                                               " exceeds data length " +
                                               std::to_string(hist.length()));
    }
    if (hist.n[0] < 1) {
        throw Error(ErrorKind::Infeasible, "no never-watermarked point is left");
    }
}

AllocationSolution make_solution(const CountHistogram& hist, std::vector<Count> y) {
    AllocationSolution sol;
    sol.y_hat.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) sol.y_hat[i] = hist.n[i] - y[i];
    sol.next_counts = next_histogram(hist, y);
    sol.log10_objective = objective_log10(sol.next_counts);
    sol.y = std::move(y);
    return sol;
}

// Objective of next_histogram(hist, y) without allocating.
class Evaluator {
public:
    explicit Evaluator(const CountHistogram& hist) : n_(hist.n), next_(hist.n.size() + 1) {}

    double operator()(std::span<const Count> y) {
        const std::size_t h = n_.size() - 1;
        next_[0] = n_[0] - y[0];
        for (std::size_t i = 1; i <= h; ++i) next_[i] = y[i - 1] + n_[i] - y[i];
        next_[h + 1] = y[h];
        return objective_log10(next_);
    }

    // A bucket paired with itself (even top index) contributes (1/2)^n.
    static double objective_log10(std::span<const Count> n) {
        const std::size_t top = n.size() - 1;
        double acc = 0.0;
        for (std::size_t i = 0; i <= top; ++i) {
            if (n[i] == 0) continue;
            const auto a = static_cast<double>(n[i]);
            const auto b = static_cast<double>(n[top - i]);
            acc += a * std::log10(a / (a + b));
        }
        return acc;
    }

private:
    std::span<const Count> n_;
    std::vector<Count> next_;
};

bool better(double obj, std::span<const Count> y, double best_obj, std::span<const Count> best_y) {
    if (obj < best_obj - kTieTolerance) return true;
    if (obj > best_obj + kTieTolerance) return false;
    return std::lexicographical_compare(y.begin(), y.end(), best_y.begin(), best_y.end());
}

// Enumerates every feasible y in lexicographic order.
template <typename Visit>
void enumerate(const CountHistogram& hist, Count w, Visit&& visit) {
    const std::size_t k = hist.n.size();
    std::vector<Count> suffix(k + 1, 0);
    for (std::size_t i = k; i-- > 0;) suffix[i] = suffix[i + 1] + hist.n[i];
    std::vector<Count> y(k, 0);
    auto rec = [&](auto&& self, std::size_t i, Count left) -> void {
        if (i == k - 1) {
            if (left > hist.n[i] || (i == 0 && left < 1)) return;
            y[i] = left;
            visit(std::span<const Count>(y));
            return;
        }
        const Count lo = std::max<Count>(i == 0 ? 1 : 0, left - suffix[i + 1]);
        const Count hi = std::min(hist.n[i], left);
        for (Count v = lo; v <= hi; ++v) {
            y[i] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, w);
}

std::vector<Count> greedy_fresh(const CountHistogram& hist, Count w) {
    std::vector<Count> y(hist.n.size(), 0);
    Count left = w;
    for (std::size_t i = 0; i < y.size() && left > 0; ++i) {
        y[i] = std::min(hist.n[i], left);
        left -= y[i];
    }
    return y;
}

std::vector<Count> greedy_reuse(const CountHistogram& hist, Count w) {
    std::vector<Count> y(hist.n.size(), 0);
    y[0] = 1;
    Count left = w - 1;
    for (std::size_t i = y.size(); i-- > 0 && left > 0;) {
        const Count take = std::min(hist.n[i] - y[i], left);
        y[i] += take;
        left -= take;
    }
    return y;
}

std::vector<Count> random_start(const CountHistogram& hist, Count w, std::mt19937_64& rng) {
    std::vector<Count> y(hist.n.size(), 0);
    y[0] = 1;
    Count left = w - 1;
    std::vector<std::size_t> open;
    while (left > 0) {
        open.clear();
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] < hist.n[i]) open.push_back(i);
        }
        const auto i = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
        const Count room = std::min(hist.n[i] - y[i], left);
        const Count take = std::uniform_int_distribution<Count>(1, room)(rng);
        y[i] += take;
        left -= take;
    }
    return y;
}

// Steepest descent over transfers y_i -= d, y_j += d, halving d until unit
// moves no longer improve.
void descend(const CountHistogram& hist, Count w, std::vector<Count>& y, double& obj,
             Evaluator& eval) {
    const std::size_t k = y.size();
    std::vector<Count> trial(y);
    Count step = std::max<Count>(1, w / 4);
    while (true) {
        double best = obj;
        std::size_t bi = k, bj = k;
        for (std::size_t i = 0; i < k; ++i) {
            if (y[i] - step < (i == 0 ? 1 : 0)) continue;
            for (std::size_t j = 0; j < k; ++j) {
                if (j == i || y[j] + step > hist.n[j]) continue;
                trial = y;
                trial[i] -= step;
                trial[j] += step;
                const double v = eval(trial);
                if (v < best - kTieTolerance) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi == k) {
            if (step == 1) return;
            step /= 2;
            continue;
        }
        y[bi] -= step;
        y[bj] += step;
        obj = best;
    }
}

}  // namespace

double objective_log10(const CountHistogram& hist) {
    if (hist.n.empty()) return 0.0;
    return Evaluator::objective_log10(hist.n);
}

CountHistogram next_histogram(const CountHistogram& hist, std::span<const Count> y) {
    if (y.size() != hist.n.size()) {
        throw Error(ErrorKind::LengthMismatch, "allocation needs one entry per bucket");
    }
    const std::size_t h = hist.n.size() - 1;
    CountHistogram next;
    next.n.assign(h + 2, 0);
    next.n[0] = hist.n[0] - y[0];
    for (std::size_t i = 1; i <= h; ++i) next.n[i] = y[i - 1] + hist.n[i] - y[i];
    next.n[h + 1] = y[h];
    return next;
}

bool is_feasible(const CountHistogram& hist, Count w, std::span<const Count> y) {
    if (y.size() != hist.n.size() || y.empty()) return false;
    Count sum = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] > hist.n[i]) return false;
        sum += y[i];
    }
    return sum == w && y[0] >= 1;
}

std::uint64_t count_candidates(const CountHistogram& hist, Count w, std::uint64_t cap) {
    if (hist.n.empty() || w < 1) return 0;
    // ways[s] = number of prefixes summing to s, saturated at cap.
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(w) + 1, 0);
    for (Count v = 1; v <= std::min(hist.n[0], w); ++v) ways[static_cast<std::size_t>(v)] = 1;
    std::vector<std::uint64_t> next(ways.size());
    for (std::size_t i = 1; i < hist.n.size(); ++i) {
        const Count lim = hist.n[i];
        std::uint64_t window = 0;
        for (std::size_t s = 0; s < ways.size(); ++s) {
            window = std::min(cap, window + ways[s]);
            if (static_cast<Count>(s) - lim - 1 >= 0) {
                window -= ways[static_cast<std::size_t>(s - lim - 1)];
            }
            next[s] = window;
        }
        ways.swap(next);
    }
    return std::min(cap, ways.back());
}

AllocationSolution solve_allocation(const CountHistogram& hist, Count w,
                                    const SolverOptions& options) {
    check_instance(hist, w);
    Evaluator eval(hist);
    const auto candidates = count_candidates(hist, w, options.exhaustive_limit + 1);
    if (candidates <= options.exhaustive_limit) {
        std::vector<Count> best_y;
        double best_obj = std::numeric_limits<double>::infinity();
        enumerate(hist, w, [&](std::span<const Count> y) {
            const double v = eval(y);
            if (best_y.empty() || better(v, y, best_obj, best_y)) {
                best_obj = v;
                best_y.assign(y.begin(), y.end());
            }
        });
        return make_solution(hist, std::move(best_y));
    }

    std::vector<std::vector<Count>> starts{greedy_fresh(hist, w), greedy_reuse(hist, w)};
    std::mt19937_64 rng(options.seed);
    for (unsigned r = 0; r < options.restarts; ++r) starts.push_back(random_start(hist, w, rng));

    std::vector<Count> best_y;
    double best_obj = std::numeric_limits<double>::infinity();
    for (auto& y : starts) {
        double obj = eval(y);
        descend(hist, w, y, obj, eval);
        if (best_y.empty() || better(obj, y, best_obj, best_y)) {
            best_obj = obj;
            best_y = y;
        }
    }
    return make_solution(hist, std::move(best_y));
}

AllocationSolution brute_force_allocation(const CountHistogram& hist, Count w) {
    check_instance(hist, w);
    constexpr std::uint64_t kGuard = 10'000'000;
    if (count_candidates(hist, w, kGuard + 1) > kGuard) {
        throw Error(ErrorKind::TooLarge, "more than 10^7 candidate allocations");
    }
    std::vector<Count> best_y;
    double best_obj = std::numeric_limits<double>::infinity();
    enumerate(hist, w, [&](std::span<const Count> y) {
        const double v = objective_log10(next_histogram(hist, y));
        if (best_y.empty() || better(v, y, best_obj, best_y)) {
            best_obj = v;
            best_y.assign(y.begin(), y.end());
        }
    });
    return make_solution(hist, std::move(best_y));
}

WeightedAllocation solve_allocation_weighted(const CountHistogram& hist, double beta, Count w_max,
                                             const SolverOptions& options) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "weight must lie in [0, 1]");
    }
    if (w_max < 2) throw Error(ErrorKind::Infeasible, "no watermark length below the cap");
    if (w_max > hist.length()) {
        throw Error(ErrorKind::Infeasible, "length cap exceeds data length");
    }
    WeightedAllocation best;
    bool have = false;
    for (Count w = 1; w < w_max; ++w) {
        auto alloc = solve_allocation(hist, w, options);
        const double score = beta * std::pow(10.0, alloc.log10_objective) +
                             (1.0 - beta) * static_cast<double>(w);
        const bool take =
            !have || score < best.weighted_objective - kTieTolerance ||
            (score <= best.weighted_objective + kTieTolerance &&
             alloc.log10_objective < best.allocation.log10_objective - kTieTolerance);
        if (take) {
            best = WeightedAllocation{w, std::move(alloc), score};
            have = true;
        }
    }
    return best;
}

std::vector<AllocationSolution> allocation_chain(Count length, Count w, std::size_t sharings,
                                                 const SolverOptions& options) {
    CountHistogram hist{{length}};
    std::vector<AllocationSolution> chain;
    chain.reserve(sharings);
    for (std::size_t s = 0; s < sharings; ++s) {
        chain.push_back(solve_allocation(hist, w, options));
        hist = chain.back().next_counts;
    }
    return chain;
}

}  // namespace seqmark
