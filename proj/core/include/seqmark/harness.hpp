#ifndef SEQMARK_HARNESS_HPP
#define SEQMARK_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqmark/correlation.hpp"
#include "seqmark/sequence.hpp"

namespace seqmark {

// ---------------------------------------------------------------------------
// Data files
// ---------------------------------------------------------------------------

/// Plain CSV of integers, one record per row. Every value must lie in [0, states).
std::vector<Sequence> load_matrix(const std::filesystem::path& path, unsigned states);
std::vector<Sequence> parse_matrix(std::istream& in, unsigned states, const std::string& source = "<stream>");
void save_matrix(std::span<const Sequence> rows, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic correlated data
// ---------------------------------------------------------------------------

/// When x_source = source_state, x_target is forced to target_state with
/// probability p and otherwise drawn uniformly from the remaining states.
using CorrelationSpec = std::vector<Correlation>;

/// Linkage blocks of `block_size` consecutive columns: the first column of a
/// block is sampled freely and the others copy it with probability p.
CorrelationSpec block_correlation_spec(std::size_t length, unsigned states, std::size_t block_size,
                                       double p);

std::vector<Sequence> generate_synthetic(std::size_t length, unsigned states, std::size_t records,
                                         const CorrelationSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

class ResultTable {
public:
    ResultTable() = default;
    explicit ResultTable(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
    bool empty() const noexcept { return rows_.empty(); }

    void add_row(std::vector<std::string> row);
    void append(const ResultTable& other);
    std::optional<std::size_t> column_index(const std::string& name) const;

    /// Value of `metric` in the first row whose key columns match `where`.
    std::optional<double> lookup(const std::string& metric,
                                 const std::map<std::string, std::string>& where = {}) const;

    friend bool operator==(const ResultTable&, const ResultTable&) = default;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Shortest round-trippable decimal form.
std::string format_number(double value);

void write_csv(const ResultTable& table, std::ostream& out);
ResultTable read_csv(std::istream& in);

struct PlotSpec {
    std::string x_column = "h";
    std::vector<std::string> series_columns = {"metric"};
};

/// Writes the CSV and, when `long_path` is set, a plot-ready (x, y, series) file.
void emit_results(const ResultTable& table, const std::filesystem::path& csv_path,
                  const std::optional<std::filesystem::path>& long_path = std::nullopt,
                  const PlotSpec& plot = {});

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

enum class Scenario {
    Collusion,
    PartialKnowledge,
    Correlation,
    Combined,
    PartialShare,
    ModificationSingle,
    ModificationCollusion,
};

enum class Embedding { Uncorrelated, Correlated };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);
std::string to_string(Embedding embedding);
Embedding embedding_from_string(const std::string& name);

struct ExperimentConfig {
    Scenario scenario = Scenario::Collusion;
    std::size_t length = 7690;
    unsigned states = 3;
    double ratio = 0.05;
    std::optional<Count> watermark_length;  // overrides ratio
    std::size_t sharings = 1;               // h
    std::size_t hidden = 0;                 // t, partial knowledge
    std::size_t colluders = 0;              // 0 = every recipient
    double pi = 0.0;                        // noise multiplier
    double fraction = 1.0;                  // partial sharing
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.5, 1.0};
    std::size_t phi = 1;
    std::size_t phi_hat = 1;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    Embedding embedding = Embedding::Uncorrelated;
    double tau = 0.9;
    std::string data_file;                  // empty = synthetic data
    std::size_t synthetic_records = 1000;
    std::size_t block_size = 3;
    double link_probability = 0.97;
    std::size_t workers = 0;                // 0 = SEQMARK_WORKERS or hardware

    Count w() const;
    void validate() const;
};

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& defaults = {});
std::string config_to_json(const ExperimentConfig& config);

/// Parameter sweep: field name -> values (numbers or strings).
using ConfigGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;
ConfigGrid grid_from_json(const std::string& text);
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const ConfigGrid& grid);
void set_config_field(ExperimentConfig& config, const std::string& field, const std::string& value);

struct ExperimentResult {
    ResultTable aggregate;  // one row per metric
    ResultTable trials;     // one row per trial and metric
};

/// Runs `config.trials` independent trials seeded with seed + trial index and
/// averages their metrics.
ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentResult run_campaign(std::span<const ExperimentConfig> configs);

/// Worker count: explicit value, else SEQMARK_WORKERS, else hardware threads.
std::size_t resolve_workers(std::size_t requested);

}  // namespace seqmark

#endif  // SEQMARK_HARNESS_HPP
