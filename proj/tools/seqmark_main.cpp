// seqmark command-line front end.
//
// Every subcommand accepts --config <file.json>; keys are the long option
// names (dashes or underscores). Values given on the command line win.
// Failures print one JSON line {"error": kind, "message": text} on stderr.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqmark/seqmark.hpp"

namespace {

using nlohmann::json;
using namespace seqmark;

// Flat JSON object -> CLI11 config items for one subcommand. The "grid"
// object belongs to the experiment runner and is skipped here.
class JsonConfig : public CLI::Config {
public:
    explicit JsonConfig(std::string section) : section_(std::move(section)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json doc;
        try {
            input >> doc;
        } catch (const json::exception& ex) {
            throw CLI::ConversionError(std::string("config: ") + ex.what());
        }
        if (!doc.is_object()) throw CLI::ConversionError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : doc.items()) {
            if (key == "grid") continue;
            CLI::ConfigItem item;
            if (!section_.empty()) item.parents = {section_};
            item.name = key;
            std::replace(item.name.begin(), item.name.end(), '_', '-');
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else if (!value.is_null()) {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
        return items;
    }

private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_float()) return format_number(v.get<double>());
        return v.dump();
    }

    std::string section_;
};

void fail(const std::string& kind, const std::string& message) {
    json line{{"error", kind}, {"message", message}};
    std::cerr << line.dump() << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

Sequence load_record(const std::string& path, unsigned states, std::size_t record) {
    auto rows = load_matrix(path, states);
    if (record >= rows.size()) {
        throw Error(ErrorKind::OutOfRange, path + " has only " + std::to_string(rows.size()) +
                                               " records");
    }
    return rows[record];
}

Count resolve_w(std::optional<Count> w, std::optional<double> ratio, std::size_t length) {
    if (w) return *w;
    if (ratio) return std::max<Count>(1, std::llround(*ratio * static_cast<double>(length)));
    throw Error(ErrorKind::InvalidArgument, "either --w or --ratio is required");
}

json solution_json(std::size_t h, const AllocationSolution& s) {
    return {{"h", h},
            {"y", s.y},
            {"y_hat", s.y_hat},
            {"next_counts", s.next_counts.n},
            {"log10_objective", s.log10_objective}};
}

// ---------------------------------------------------------------------------

struct AllocateArgs {
    std::vector<Count> counts;
    std::size_t length = 0;
    std::optional<Count> w;
    std::optional<double> ratio;
    std::size_t sharings = 1;
    bool brute = false;
    std::optional<double> beta;
    std::optional<Count> w_max;
    std::uint64_t seed = SolverOptions{}.seed;
    std::string out;
};

int run_allocate(const AllocateArgs& a) {
    CountHistogram hist;
    if (!a.counts.empty()) {
        hist.n = a.counts;
    } else if (a.length > 0) {
        hist.n = {static_cast<Count>(a.length)};
    } else {
        throw Error(ErrorKind::InvalidArgument, "give --counts or --length");
    }
    const auto length = static_cast<std::size_t>(hist.length());
    SolverOptions opts;
    opts.seed = a.seed;
    json doc{{"length", length}, {"input_counts", hist.n}};
    if (a.beta) {
        if (!a.w_max) throw Error(ErrorKind::InvalidArgument, "--beta needs --w-max");
        const auto r = solve_allocation_weighted(hist, *a.beta, *a.w_max, opts);
        doc["w"] = r.w;
        doc["weighted_objective"] = r.weighted_objective;
        doc["steps"] = json::array({solution_json(hist.sharings(), r.allocation)});
    } else {
        const Count w = resolve_w(a.w, a.ratio, length);
        doc["w"] = w;
        doc["steps"] = json::array();
        for (std::size_t s = 0; s < a.sharings; ++s) {
            const auto sol = a.brute ? brute_force_allocation(hist, w) : solve_allocation(hist, w, opts);
            doc["steps"].push_back(solution_json(hist.sharings(), sol));
            hist = sol.next_counts;
        }
    }
    write_text(a.out, doc.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
    std::string data;
    std::size_t record = 0;
    unsigned states = 3;
    std::string ledger;
    std::string ledger_out;
    SpId sp = 0;
    std::optional<Count> w;
    std::optional<double> ratio;
    std::string model;
    double tau = 0.9;
    std::vector<Position> indices;
    std::uint64_t seed = 1;
    std::string out;
};

int run_embed(const EmbedArgs& a) {
    const auto base = load_record(a.data, a.states, a.record);
    SharingLedger ledger = a.ledger.empty() || !std::filesystem::exists(a.ledger)
                               ? SharingLedger(base)
                               : load_ledger(a.ledger, base);
    const auto idx = a.indices.empty() ? full_index_set(base.size()) : a.indices;
    const Count w = resolve_w(a.w, a.ratio, idx.size());
    const auto hist = counts(ledger, idx);
    const auto alloc = solve_allocation(hist, w);
    EmbedResult r = a.model.empty()
                        ? embed_uncorrelated(ledger, idx, alloc, a.sp, a.seed)
                        : embed_correlated(ledger, idx, alloc.y, load_model(a.model, a.tau), w, a.sp);
    ledger.record_sharing(a.sp, idx, r.pattern);
    const std::string ledger_out = a.ledger_out.empty() ? a.ledger : a.ledger_out;
    if (ledger_out.empty()) throw Error(ErrorKind::InvalidArgument, "give --ledger or --ledger-out");
    save_ledger(ledger, ledger_out);
    // Only the shared positions leave the owner.
    std::ostringstream row;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) row << ',';
        row << static_cast<unsigned>(r.data[idx[k]]);
    }
    row << '\n';
    write_text(a.out, row.str());
    return 0;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
    std::string data;
    std::size_t record = 0;
    unsigned states = 3;
    std::string ledger;
    std::string leak;
    std::size_t phi_hat = 1;
    std::string mode = "auto";
    std::vector<SpId> truth;
    std::string out;
    std::string csv;
};

int run_detect(const DetectArgs& a) {
    const auto base = load_record(a.data, a.states, a.record);
    const auto ledger = load_ledger(a.ledger, base);
    // Leak file: one CSV row; empty cells are positions that were not leaked.
    std::ifstream in(a.leak);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + a.leak);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<Position> covered;
    std::vector<State> values;
    std::size_t col = 0, start = 0;
    while (true) {
        const auto end = std::min(line.find(',', start), line.size());
        const auto cell = line.substr(start, end - start);
        if (!cell.empty()) {
            unsigned v = 0;
            try {
                std::size_t used = 0;
                v = static_cast<unsigned>(std::stoul(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(ErrorKind::Parse, a.leak + ":1:" + std::to_string(col + 1) +
                                                  ": expected an integer");
            }
            if (v >= a.states) {
                throw Error(ErrorKind::OutOfRange,
                            a.leak + ":1:" + std::to_string(col + 1) + ": state out of range");
            }
            covered.push_back(col);
            values.push_back(static_cast<State>(v));
        }
        ++col;
        if (end == line.size()) break;
        start = end + 1;
    }
    if (col != base.size()) {
        throw Error(ErrorKind::LengthMismatch, "leak row has " + std::to_string(col) +
                                                   " cells, data has " +
                                                   std::to_string(base.size()));
    }
    std::string mode = a.mode;
    if (mode == "auto") {
        mode = covered.size() < base.size() ? "partial" : (a.phi_hat > 1 ? "combination" : "single");
    }
    DetectionReport rep;
    if (mode == "partial") {
        rep = partial_leak_candidates(values, covered, ledger);
    } else {
        const auto leak = extract_leak_pattern(values, covered, base);
        if (mode == "single") {
            rep = detect_single(leak, ledger);
        } else if (mode == "combination") {
            rep = detect_combination(leak, ledger, a.phi_hat);
        } else {
            throw Error(ErrorKind::InvalidArgument, "unknown mode '" + mode + "'");
        }
    }
    if (!a.truth.empty()) score_report(rep, a.truth, rep.candidates);

    json doc{{"mode", mode},
             {"suspects", rep.suspects},
             {"candidates", rep.candidates},
             {"scores", rep.scores},
             {"entropy_bits", rep.entropy_bits},
             {"no_evidence", rep.no_evidence}};
    if (!rep.combinations.empty()) {
        doc["combinations"] = rep.combinations;
        doc["combination_scores"] = rep.combination_scores;
    }
    if (rep.precision) doc["precision"] = *rep.precision;
    if (rep.recall) doc["recall"] = *rep.recall;
    write_text(a.out, doc.dump(2) + "\n");

    if (!a.csv.empty()) {
        ResultTable t({"mode", "suspects", "entropy_bits", "no_evidence", "precision", "recall"});
        std::string s;
        for (auto id : rep.suspects) s += (s.empty() ? "" : ";") + std::to_string(id);
        t.add_row({mode, s, format_number(rep.entropy_bits), rep.no_evidence ? "1" : "0",
                   rep.precision ? format_number(*rep.precision) : "",
                   rep.recall ? format_number(*rep.recall) : ""});
        emit_results(t, a.csv);
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::size_t length = 100;
    unsigned states = 3;
    std::size_t records = 1000;
    std::size_t block_size = 3;
    double link_probability = 0.97;
    std::uint64_t seed = 1;
    std::string out;
    std::string model_out;
    double tau = 0.9;
};

int run_generate(const GenerateArgs& a) {
    const auto spec = block_correlation_spec(a.length, a.states, a.block_size, a.link_probability);
    const auto rows = generate_synthetic(a.length, a.states, a.records, spec, a.seed);
    if (a.out.empty()) throw Error(ErrorKind::InvalidArgument, "--out is required");
    save_matrix(rows, a.out);
    if (!a.model_out.empty()) save_model(estimate_correlations(rows, a.tau), a.model_out);
    return 0;
}

// ---------------------------------------------------------------------------

// Experiment fields exposed as options; applied on top of the config file.
struct ExperimentArgs {
    std::map<std::string, std::string> fields;
    std::vector<std::string> fractions;
    std::string out;
    std::string trials_out;
    std::string long_out;
    std::string plot_x = "h";
    std::vector<std::string> plot_series{"metric"};
    std::string config_path;
};

const std::vector<std::string> kExperimentFields = {
    "scenario", "length", "states", "ratio", "w", "sharings", "hidden", "colluders",
    "pi", "fraction", "phi", "phi-hat", "trials", "seed", "embedding", "tau",
    "data-file", "synthetic-records", "block-size", "link-probability", "workers"};

void add_experiment_options(CLI::App* sub, ExperimentArgs& a, bool attack) {
    for (const auto& f : kExperimentFields) {
        if (attack && f == "scenario") {
            sub->add_option("--kind,--scenario", a.fields[f], "attack kind");
            continue;
        }
        sub->add_option("--" + f, a.fields[f]);
    }
    sub->add_option("--fractions", a.fractions, "inference fractions")->delimiter(',');
    sub->add_option("--out", a.out, "aggregate CSV")->required();
    sub->add_option("--trials-out", a.trials_out, "per-trial CSV");
    if (!attack) {
        sub->add_option("--long", a.long_out, "plot-ready x,y,series CSV");
        sub->add_option("--plot-x", a.plot_x, "column used as x");
        sub->add_option("--plot-series", a.plot_series, "columns naming a series")->delimiter(',');
    }
}

int run_experiment_cmd(CLI::App* sub, const ExperimentArgs& a, bool attack) {
    ExperimentConfig base;
    for (const auto& [name, value] : a.fields) {
        auto key = name;
        std::replace(key.begin(), key.end(), '-', '_');
        if (sub->get_option("--" + name)->count() > 0) set_config_field(base, key, value);
    }
    if (!a.fractions.empty()) {
        std::string joined;
        for (const auto& f : a.fractions) joined += (joined.empty() ? "" : ",") + f;
        set_config_field(base, "fractions", joined);
    }
    ConfigGrid grid;
    if (!a.config_path.empty()) grid = grid_from_json(read_file(a.config_path));
    const auto configs = expand_grid(base, grid);
    const auto result = run_campaign(configs);

    std::optional<std::filesystem::path> long_path;
    if (!a.long_out.empty()) long_path = a.long_out;
    emit_results(result.aggregate, a.out, long_path, PlotSpec{a.plot_x, a.plot_series});
    std::string trials = a.trials_out;
    if (trials.empty() && attack) {
        const std::filesystem::path p(a.out);
        trials = (p.parent_path() / (p.stem().string() + "_trials.csv")).string();
    }
    if (!trials.empty()) emit_results(result.trials, trials);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seqmark: collusion-secure watermarking of discrete sequences"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string section = argc > 1 ? argv[1] : "";
    auto* config_opt = app.set_config("--config", "", "JSON file with option values");
    app.config_formatter(std::make_shared<JsonConfig>(section));
    app.allow_config_extras(CLI::config_extras_mode::error);

    AllocateArgs alloc;
    auto* c_alloc = app.add_subcommand("allocate", "solve the next-sharing allocation");
    c_alloc->add_option("--counts", alloc.counts, "histogram n_0..n_h")->delimiter(',');
    c_alloc->add_option("--length", alloc.length, "data length for a first sharing");
    c_alloc->add_option("--w", alloc.w, "watermark length");
    c_alloc->add_option("--ratio", alloc.ratio, "watermark ratio w/length");
    c_alloc->add_option("--sharings", alloc.sharings, "number of successive sharings");
    c_alloc->add_flag("--brute", alloc.brute, "exhaustive reference solver");
    c_alloc->add_option("--beta", alloc.beta, "weight of the probability term");
    c_alloc->add_option("--w-max", alloc.w_max, "exclusive cap on the watermark length");
    c_alloc->add_option("--seed", alloc.seed, "local-search seed");
    c_alloc->add_option("--out", alloc.out, "output JSON (default stdout)");

    EmbedArgs emb;
    auto* c_embed = app.add_subcommand("embed", "watermark one copy and update the ledger");
    c_embed->add_option("--data", emb.data, "original data CSV")->required();
    c_embed->add_option("--record", emb.record, "row of the data file");
    c_embed->add_option("--states", emb.states, "state count");
    c_embed->add_option("--ledger", emb.ledger, "ledger JSON (created when missing)");
    c_embed->add_option("--ledger-out", emb.ledger_out, "updated ledger (default --ledger)");
    c_embed->add_option("--sp", emb.sp, "recipient id")->required();
    c_embed->add_option("--w", emb.w, "watermark length");
    c_embed->add_option("--ratio", emb.ratio, "watermark ratio");
    c_embed->add_option("--model", emb.model, "correlation model JSON");
    c_embed->add_option("--tau", emb.tau, "correlation threshold");
    c_embed->add_option("--indices", emb.indices, "shared positions")->delimiter(',');
    c_embed->add_option("--seed", emb.seed, "embedding seed");
    c_embed->add_option("--out", emb.out, "watermarked data CSV (default stdout)");

    ExperimentArgs att;
    auto* c_attack = app.add_subcommand("attack", "run an attack campaign");
    add_experiment_options(c_attack, att, true);

    DetectArgs det;
    auto* c_detect = app.add_subcommand("detect", "attribute a leaked copy");
    c_detect->add_option("--data", det.data, "original data CSV")->required();
    c_detect->add_option("--record", det.record, "row of the data file");
    c_detect->add_option("--states", det.states, "state count");
    c_detect->add_option("--ledger", det.ledger, "ledger JSON")->required();
    c_detect->add_option("--leak", det.leak, "leaked row CSV; empty cells are missing")->required();
    c_detect->add_option("--phi-hat", det.phi_hat, "assumed number of colluders");
    c_detect->add_option("--mode", det.mode, "auto|single|combination|partial");
    c_detect->add_option("--truth", det.truth, "true leakers for scoring")->delimiter(',');
    c_detect->add_option("--out", det.out, "report JSON (default stdout)");
    c_detect->add_option("--csv", det.csv, "report CSV row");

    ExperimentArgs exp;
    auto* c_exp = app.add_subcommand("experiment", "run a configured experiment campaign");
    add_experiment_options(c_exp, exp, false);

    GenerateArgs gen;
    auto* c_gen = app.add_subcommand("generate", "write synthetic correlated data");
    c_gen->add_option("--length", gen.length, "points per record");
    c_gen->add_option("--states", gen.states, "state count");
    c_gen->add_option("--records", gen.records, "number of records");
    c_gen->add_option("--block-size", gen.block_size, "points per linkage block");
    c_gen->add_option("--link-probability", gen.link_probability, "within-block copy probability");
    c_gen->add_option("--seed", gen.seed, "generator seed");
    c_gen->add_option("--out", gen.out, "output CSV")->required();
    c_gen->add_option("--model-out", gen.model_out, "estimated correlation model JSON");
    c_gen->add_option("--tau", gen.tau, "threshold for the model");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail("usage", e.what());
        return 64;
    }

    try {
        const std::string config_path = config_opt->count() > 0 ? config_opt->as<std::string>() : "";
        if (*c_alloc) return run_allocate(alloc);
        if (*c_embed) return run_embed(emb);
        if (*c_detect) return run_detect(det);
        if (*c_gen) return run_generate(gen);
        if (*c_attack) {
            att.config_path = config_path;
            return run_experiment_cmd(c_attack, att, true);
        }
        if (*c_exp) {
            exp.config_path = config_path;
            return run_experiment_cmd(c_exp, exp, false);
        }
    } catch (const Error& e) {
        fail(std::string(to_string(e.kind())), e.what());
        return 2;
    } catch (const std::exception& e) {
        fail("internal", e.what());
        return 3;
    }
    return 0;
}
