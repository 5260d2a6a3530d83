#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "json.hpp"
#include "seqmark/adversary.hpp"
#include "seqmark/allocation.hpp"
#include "seqmark/detector.hpp"
#include "seqmark/embedder.hpp"
#include "seqmark/harness.hpp"

namespace seqmark {

using nlohmann::json;

namespace {

constexpr std::pair<Scenario, const char*> kScenarios[] = {
    {Scenario::Collusion, "collusion"},
    {Scenario::PartialKnowledge, "partial_knowledge"},
    {Scenario::Correlation, "correlation"},
    {Scenario::Combined, "combined"},
    {Scenario::PartialShare, "partial_share"},
    {Scenario::ModificationSingle, "modification_single"},
    {Scenario::ModificationCollusion, "modification_collusion"},
};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream for one purpose within one trial.
std::uint64_t sub_seed(std::uint64_t trial_seed, std::uint64_t tag) {
    return splitmix(splitmix(trial_seed) ^ (tag * 0xd1b54a32d192ed03ULL));
}

enum Tag : std::uint64_t { kData = 1, kEmbed = 2, kPick = 3, kNoise = 4, kShare = 5, kAttack = 6 };

double parse_double(const std::string& field, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, "field '" + field + "' expects a number, got '" + v + "'");
    }
}

std::uint64_t parse_uint(const std::string& field, const std::string& v) {
    if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
        }
    }
    const double d = parse_double(field, v);
    if (d < 0 || d != std::floor(d) || d >= 9.0e15) {
        throw Error(ErrorKind::Parse, "field '" + field + "' expects a non-negative integer");
    }
    return static_cast<std::uint64_t>(d);
}

std::vector<double> parse_list(const std::string& field, const std::string& v) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const auto end = std::min(v.find(',', start), v.size());
        out.push_back(parse_double(field, v.substr(start, end - start)));
        start = end + 1;
    }
    return out;
}

std::string json_scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) {
            if (!s.empty()) s += ',';
            s += json_scalar(e);
        }
        return s;
    }
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.dump();
}

// ---------------------------------------------------------------------------

struct Setup {
    ExperimentConfig cfg;
    Count w = 0;
    std::vector<CountHistogram> hist;  // hist[s] = histogram after s sharings
    std::vector<AllocationSolution> chain;  // chain[s] = allocation of sharing s+1
    std::vector<Sequence> corpus;      // empty = fresh uniform data per trial
    CorrelationModel model;
    TargetRule rule;
};

using Metrics = std::vector<std::pair<std::string, double>>;

Sequence trial_data(const Setup& s, std::size_t trial, std::uint64_t seed) {
    if (!s.corpus.empty()) return s.corpus[trial % s.corpus.size()];
    std::mt19937_64 rng(sub_seed(seed, kData));
    std::uniform_int_distribution<unsigned> any(0, s.cfg.states - 1);
    std::vector<State> v(s.cfg.length);
    for (auto& x : v) x = static_cast<State>(any(rng));
    return Sequence(std::move(v), s.cfg.states);
}

struct Shared {
    SharingLedger ledger;
    std::vector<Sequence> copies;
    std::vector<WatermarkPattern> truth;
};

Shared share(const Setup& s, Sequence base, std::size_t sharings, std::uint64_t seed) {
    Shared out{SharingLedger(std::move(base)), {}, {}};
    const auto idx = full_index_set(s.cfg.length);
    for (std::size_t k = 0; k < sharings; ++k) {
        const auto sp = static_cast<SpId>(k + 1);
        const auto& alloc = s.chain[k];
        EmbedResult r = s.cfg.embedding == Embedding::Correlated
                            ? embed_correlated(out.ledger, idx, alloc.y, s.model, s.w, sp)
                            : embed_uncorrelated(out.ledger, idx, alloc, sp,
                                                 sub_seed(seed, kEmbed + 16 * (k + 1)), s.rule);
        out.ledger.record_sharing(sp, idx, r.pattern);
        out.copies.push_back(std::move(r.data));
        out.truth.push_back(std::move(r.pattern));
    }
    return out;
}

std::vector<std::size_t> pick_subset(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<SpId> all_ids(std::size_t h) {
    std::vector<SpId> ids(h);
    std::iota(ids.begin(), ids.end(), SpId{1});
    return ids;
}

std::string fraction_key(const std::string& name, double f) {
    return name + "@" + format_number(f);
}

Metrics detection_metrics(DetectionReport& rep, const std::vector<SpId>& truth, std::size_t h) {
    const auto ids = all_ids(h);
    score_report(rep, truth, ids);
    return {{"precision", *rep.precision},
            {"recall", *rep.recall},
            {"entropy_bits", rep.entropy_bits},
            {"suspects", static_cast<double>(rep.suspects.size())},
            {"no_evidence", rep.no_evidence ? 1.0 : 0.0}};
}

Metrics run_trial(const Setup& s, std::size_t trial) {
    const auto& c = s.cfg;
    const std::uint64_t seed = c.seed + trial;
    const std::size_t h = c.sharings;
    Metrics m;
    switch (c.scenario) {
        case Scenario::Collusion: {
            auto sh = share(s, trial_data(s, trial, seed), h, seed);
            const auto& hist = s.hist[h];
            m.emplace_back("log10_whole_probability",
                           log10_truth_probability(sh.copies, sh.truth, hist, 0));
            const auto att = collusion_attack(sh.copies, hist, s.w, 0, sh.truth);
            m.emplace_back("attack_success_fraction", att.success_fraction);
            for (double f : c.fractions) {
                FractionOptions fo;
                if (c.length > 10'000) {
                    fo.method = FractionMethod::MonteCarlo;
                    fo.trials = 10'000;
                    fo.seed = c.seed;
                }
                m.emplace_back(fraction_key("fraction_probability", f),
                               fraction_inference_probability(hist, f, fo));
            }
            break;
        }
        case Scenario::PartialKnowledge: {
            auto sh = share(s, trial_data(s, trial, seed), h, seed);
            const std::size_t k = c.colluders == 0 ? h : c.colluders;
            const auto who = pick_subset(h, k, sub_seed(seed, kPick));
            std::vector<Sequence> copies;
            std::vector<WatermarkPattern> truth;
            for (auto i : who) {
                copies.push_back(sh.copies[i]);
                truth.push_back(sh.truth[i]);
            }
            const std::size_t max_t = c.hidden > 0 ? c.hidden : h - k;
            for (std::size_t t = 0; t <= max_t; ++t) {
                m.emplace_back("log10_probability@assumed=" + std::to_string(k + t),
                               log10_truth_probability(copies, truth, s.hist[k + t], t));
            }
            break;
        }
        case Scenario::Correlation: {
            auto sh = share(s, trial_data(s, trial, seed), h, seed);
            const auto att = correlation_attack(sh.copies.back(), s.model, s.w,
                                                sub_seed(seed, kAttack), &sh.truth.back());
            for (double f : c.fractions) {
                m.emplace_back(fraction_key("inference_probability", f),
                               inference_probability(att, f, s.w));
            }
            m.emplace_back("evidence_correct", static_cast<double>(att.evidence_correct));
            m.emplace_back("attack_success_fraction", att.success_fraction);
            break;
        }
        case Scenario::Combined: {
            auto sh = share(s, trial_data(s, trial, seed), h, seed);
            const auto att = combined_attack(sh.copies, s.model, s.hist[h], s.w, sh.truth,
                                             sub_seed(seed, kAttack));
            for (double f : c.fractions) {
                m.emplace_back(fraction_key("inference_probability", f),
                               inference_probability(att, f, s.w));
            }
            m.emplace_back("evidence_correct", static_cast<double>(att.evidence_correct));
            m.emplace_back("attack_success_fraction", att.success_fraction);
            break;
        }
        case Scenario::PartialShare: {
            auto sh = share(s, trial_data(s, trial, seed), h, seed);
            const auto leaker = pick_subset(h, 1, sub_seed(seed, kPick)).front();
            const auto part = partial_share(sh.copies[leaker], c.fraction, sub_seed(seed, kShare));
            auto rep = partial_leak_candidates(part.values, part.indices, sh.ledger);
            m = detection_metrics(rep, {static_cast<SpId>(leaker + 1)}, h);
            break;
        }
        case Scenario::ModificationSingle:
        case Scenario::ModificationCollusion: {
            auto sh = share(s, trial_data(s, trial, seed), h, seed);
            const bool single = c.scenario == Scenario::ModificationSingle;
            const auto who = pick_subset(h, single ? 1 : c.phi, sub_seed(seed, kPick));
            std::vector<Sequence> copies;
            std::vector<SpId> truth;
            for (auto i : who) {
                copies.push_back(sh.copies[i]);
                truth.push_back(static_cast<SpId>(i + 1));
            }
            const auto noise = noise_count(c.pi, s.w);
            const auto leaked = add_noise(modify_majority(copies), noise, sub_seed(seed, kNoise));
            const auto leak = extract_leak_pattern(leaked, sh.ledger.base());
            auto rep = c.phi_hat == 1 ? detect_single(leak, sh.ledger)
                                      : detect_combination(leak, sh.ledger, c.phi_hat);
            m = detection_metrics(rep, truth, h);
            m.emplace_back("utility_loss",
                           static_cast<double>(noise) / static_cast<double>(c.length));
            break;
        }
    }
    return m;
}

Setup prepare(const ExperimentConfig& cfg) {
    cfg.validate();
    Setup s;
    s.cfg = cfg;
    s.w = cfg.w();
    s.rule = default_target_rule(cfg.states);

    const bool correlated = cfg.scenario == Scenario::Correlation ||
                            cfg.scenario == Scenario::Combined ||
                            cfg.embedding == Embedding::Correlated;
    if (!cfg.data_file.empty()) {
        auto rows = load_matrix(cfg.data_file, cfg.states);
        if (rows.front().size() < cfg.length) {
            throw Error(ErrorKind::LengthMismatch, "data file has fewer columns than the length");
        }
        for (auto& r : rows) {
            std::vector<State> v(r.points().begin(), r.points().begin() + cfg.length);
            s.corpus.emplace_back(std::move(v), cfg.states);
        }
    } else if (correlated) {
        const auto spec =
            block_correlation_spec(cfg.length, cfg.states, cfg.block_size, cfg.link_probability);
        s.corpus = generate_synthetic(cfg.length, cfg.states, cfg.synthetic_records, spec,
                                      splitmix(cfg.seed ^ 0xc0441a7eULL));
    }
    if (correlated) s.model = estimate_correlations(s.corpus, cfg.tau);

    // Every embedding reproduces the allocation's histogram, so the chain is
    // shared by all trials.
    std::size_t depth = cfg.sharings;
    if (cfg.scenario == Scenario::PartialKnowledge) {
        const std::size_t k = cfg.colluders == 0 ? cfg.sharings : cfg.colluders;
        depth = std::max(depth, k + (cfg.hidden > 0 ? cfg.hidden : cfg.sharings - k));
    }
    s.hist.push_back(CountHistogram{{static_cast<Count>(cfg.length)}});
    s.chain = allocation_chain(static_cast<Count>(cfg.length), s.w, depth);
    for (const auto& a : s.chain) s.hist.push_back(a.next_counts);
    return s;
}

std::vector<std::string> key_columns() {
    return {"scenario", "length", "states",   "r",         "w",      "h",
            "t",        "colluders", "pi",    "fraction",  "phi",    "phi_hat",
            "embedding", "trials", "seed"};
}

std::vector<std::string> key_values(const ExperimentConfig& c, Count w) {
    const double r = c.watermark_length ? static_cast<double>(w) / static_cast<double>(c.length)
                                        : c.ratio;
    return {to_string(c.scenario),    std::to_string(c.length), std::to_string(c.states),
            format_number(r),         std::to_string(w),        std::to_string(c.sharings),
            std::to_string(c.hidden), std::to_string(c.colluders), format_number(c.pi),
            format_number(c.fraction), std::to_string(c.phi),   std::to_string(c.phi_hat),
            to_string(c.embedding),   std::to_string(c.trials), std::to_string(c.seed)};
}

}  // namespace

std::string to_string(Scenario scenario) {
    for (const auto& [s, n] : kScenarios) {
        if (s == scenario) return n;
    }
    return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
    for (const auto& [s, n] : kScenarios) {
        if (name == n) return s;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown scenario '" + name + "'");
}

std::string to_string(Embedding embedding) {
    return embedding == Embedding::Correlated ? "correlated" : "uncorrelated";
}

Embedding embedding_from_string(const std::string& name) {
    if (name == "correlated") return Embedding::Correlated;
    if (name == "uncorrelated") return Embedding::Uncorrelated;
    throw Error(ErrorKind::InvalidArgument, "unknown embedding '" + name + "'");
}

Count ExperimentConfig::w() const {
    if (watermark_length) return *watermark_length;
    return std::max<Count>(1, std::llround(ratio * static_cast<double>(length)));
}

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
    if (length < 1) bad("length must be positive");
    if (states < 2 || states > 256) bad("states must lie in [2, 256]");
    if (!watermark_length && !(ratio > 0.0 && ratio <= 1.0)) bad("ratio must lie in (0, 1]");
    if (w() < 1 || w() > static_cast<Count>(length)) bad("watermark length must lie in [1, length]");
    if (sharings < 1) bad("at least one sharing is needed");
    if (colluders > sharings) bad("more colluders than sharings");
    if (scenario == Scenario::ModificationCollusion && (phi < 1 || phi > sharings)) {
        bad("phi must lie in [1, h]");
    }
    if (phi_hat < 1 || phi_hat > sharings) bad("phi_hat must lie in [1, h]");
    if (!(fraction > 0.0 && fraction <= 1.0)) bad("fraction must lie in (0, 1]");
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) bad("inference fractions must lie in [0, 1]");
    }
    if (pi < 0.0) bad("pi must be non-negative");
    if (noise_count(pi, w()) > length) bad("noise exceeds the data length");
    if (trials < 1) bad("trials must be positive");
    if (!(tau >= 0.0 && tau <= 1.0)) bad("tau must lie in [0, 1]");
    if (block_size < 1) bad("block_size must be positive");
    if (!(link_probability >= 0.0 && link_probability <= 1.0)) bad("link_probability in [0, 1]");
    if (synthetic_records < 1) bad("synthetic_records must be positive");
}

void set_config_field(ExperimentConfig& c, const std::string& field, const std::string& v) {
    if (field == "scenario") c.scenario = scenario_from_string(v);
    else if (field == "length" || field == "l") c.length = parse_uint(field, v);
    else if (field == "states" || field == "m") c.states = static_cast<unsigned>(parse_uint(field, v));
    else if (field == "ratio" || field == "r") { c.ratio = parse_double(field, v); c.watermark_length.reset(); }
    else if (field == "w") c.watermark_length = static_cast<Count>(parse_uint(field, v));
    else if (field == "sharings" || field == "h") c.sharings = parse_uint(field, v);
    else if (field == "hidden" || field == "t") c.hidden = parse_uint(field, v);
    else if (field == "colluders") c.colluders = parse_uint(field, v);
    else if (field == "pi") c.pi = parse_double(field, v);
    else if (field == "fraction") c.fraction = parse_double(field, v);
    else if (field == "fractions") c.fractions = parse_list(field, v);
    else if (field == "phi") c.phi = parse_uint(field, v);
    else if (field == "phi_hat") c.phi_hat = parse_uint(field, v);
    else if (field == "trials") c.trials = parse_uint(field, v);
    else if (field == "seed") c.seed = parse_uint(field, v);
    else if (field == "embedding") c.embedding = embedding_from_string(v);
    else if (field == "tau") c.tau = parse_double(field, v);
    else if (field == "data_file") c.data_file = v;
    else if (field == "synthetic_records") c.synthetic_records = parse_uint(field, v);
    else if (field == "block_size") c.block_size = parse_uint(field, v);
    else if (field == "link_probability") c.link_probability = parse_double(field, v);
    else if (field == "workers") c.workers = parse_uint(field, v);
    else throw Error(ErrorKind::InvalidArgument, "unknown config field '" + field + "'");
}

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& defaults) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Parse, std::string("config: ") + ex.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Parse, "config must be a JSON object");
    ExperimentConfig c = defaults;
    // The scenario goes first so later fields see it; "w" after "ratio".
    if (doc.contains("scenario")) set_config_field(c, "scenario", json_scalar(doc["scenario"]));
    for (const auto& [k, v] : doc.items()) {
        if (k == "scenario" || k == "grid" || k == "w") continue;
        set_config_field(c, k, json_scalar(v));
    }
    if (doc.contains("w") && !doc["w"].is_null()) set_config_field(c, "w", json_scalar(doc["w"]));
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["scenario"] = to_string(c.scenario);
    doc["length"] = c.length;
    doc["states"] = c.states;
    doc["ratio"] = c.ratio;
    if (c.watermark_length) doc["w"] = *c.watermark_length;
    doc["sharings"] = c.sharings;
    doc["hidden"] = c.hidden;
    doc["colluders"] = c.colluders;
    doc["pi"] = c.pi;
    doc["fraction"] = c.fraction;
    doc["fractions"] = c.fractions;
    doc["phi"] = c.phi;
    doc["phi_hat"] = c.phi_hat;
    doc["trials"] = c.trials;
    doc["seed"] = c.seed;
    doc["embedding"] = to_string(c.embedding);
    doc["tau"] = c.tau;
    doc["data_file"] = c.data_file;
    doc["synthetic_records"] = c.synthetic_records;
    doc["block_size"] = c.block_size;
    doc["link_probability"] = c.link_probability;
    doc["workers"] = c.workers;
    return doc.dump(2);
}

ConfigGrid grid_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Parse, std::string("config: ") + ex.what());
    }
    ConfigGrid grid;
    if (!doc.is_object() || !doc.contains("grid")) return grid;
    if (!doc["grid"].is_object()) throw Error(ErrorKind::Parse, "grid must be an object");
    for (const auto& [k, v] : doc["grid"].items()) {
        if (!v.is_array() || v.empty()) {
            throw Error(ErrorKind::Parse, "grid field '" + k + "' needs a non-empty array");
        }
        std::vector<std::string> values;
        for (const auto& e : v) values.push_back(json_scalar(e));
        grid.emplace_back(k, std::move(values));
    }
    return grid;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const ConfigGrid& grid) {
    std::vector<ExperimentConfig> out{base};
    for (const auto& [field, values] : grid) {
        std::vector<ExperimentConfig> next;
        for (const auto& c : out) {
            for (const auto& v : values) {
                auto copy = c;
                set_config_field(copy, field, v);
                next.push_back(std::move(copy));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SEQMARK_WORKERS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != nullptr && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw Error(ErrorKind::InvalidArgument, "SEQMARK_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const Setup setup = prepare(config);
    const std::size_t n = config.trials;
    std::vector<Metrics> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t t = next++; t < n; t = next++) {
            try {
                results[t] = run_trial(setup, t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min(resolve_workers(config.workers), n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (!errors[t]) continue;
        try {
            std::rethrow_exception(errors[t]);
        } catch (const Error& e) {
            throw Error(e.kind(), "trial " + std::to_string(t) + ": " + e.what());
        } catch (const std::exception& e) {
            throw Error(ErrorKind::InvalidArgument, "trial " + std::to_string(t) + ": " + e.what());
        }
    }

    auto keys = key_columns();
    auto agg_cols = keys;
    agg_cols.insert(agg_cols.end(), {"metric", "value"});
    auto trial_cols = keys;
    trial_cols.insert(trial_cols.end(), {"trial", "metric", "value"});
    ExperimentResult out{ResultTable(agg_cols), ResultTable(trial_cols)};
    const auto kv = key_values(config, setup.w);

    const auto& names = results.front();
    for (std::size_t k = 0; k < names.size(); ++k) {
        double sum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const auto& [name, value] = results[t][k];
            sum += value;
            auto row = kv;
            row.insert(row.end(), {std::to_string(t), name, format_number(value)});
            out.trials.add_row(std::move(row));
        }
        auto row = kv;
        row.insert(row.end(), {names[k].first, format_number(sum / static_cast<double>(n))});
        out.aggregate.add_row(std::move(row));
    }
    return out;
}

ExperimentResult run_campaign(std::span<const ExperimentConfig> configs) {
    ExperimentResult out;
    for (const auto& c : configs) {
        auto r = run_experiment(c);
        out.aggregate.append(r.aggregate);
        out.trials.append(r.trials);
    }
    return out;
}

}  // namespace seqmark
