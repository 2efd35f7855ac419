#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dsgd/config.hpp"
#include "dsgd/data.hpp"
#include "dsgd/engine.hpp"
#include "dsgd/graph.hpp"
#include "dsgd/neural_net.hpp"
#include "dsgd/oracle.hpp"
#include "dsgd/schedule.hpp"
#include "dsgd/validation.hpp"

namespace dsgd {

enum class ExperimentKind { centralized, distributed_random, distributed_by_class, synthetic_quadratic, synthetic_doublewell };

ExperimentKind parse_experiment_kind(std::string_view text);
std::string_view to_string(ExperimentKind kind);
bool uses_dataset(ExperimentKind kind);

/// Every effective parameter of one run, defaults included.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::synthetic_quadratic;
  TopologySpec topology = TopologySpec::ring(10);
  StepSchedule schedule;
  ValidationMode mode = ValidationMode::strict;
  OracleConfig oracle;
  std::string scaling_text;  // as written: one value, or d_w comma-separated values

  std::uint64_t iterations = 10000;
  std::uint64_t cadence = 100;
  std::uint64_t init_seed = 1;
  double init_range = 1.0;
  Execution exec = Execution::parallel;

  // Dataset experiments
  std::string data_format = "idx";  // idx | csv
  std::filesystem::path images, labels;       // idx
  std::filesystem::path features, label_csv;  // csv
  bool csv_header = false;
  std::size_t csv_d_in = 400;
  std::size_t limit = 5000;
  std::size_t n_train = 2500;
  std::uint64_t split_seed = 2018;
  std::uint64_t partition_seed = 7;
  std::size_t hidden = 50;

  // Synthetic fixtures
  std::size_t synthetic_dim = 2;
  std::size_t synthetic_samples = 4;
  double synthetic_noise = 0.5;
  double synthetic_shift = 0.1;
  std::uint64_t synthetic_seed = 11;

  std::filesystem::path output_dir = "out";

  /// Builds from config entries; unknown keys and bad values throw FormatError
  /// naming the key and its line.
  static ExperimentConfig from_config(const Config& c);
  /// Full key set, reloadable through from_config.
  Config to_config() const;
};

/// Schedule and mixing checks in the configured mode plus the
/// experiment/partition compatibility and data-file checks.
ValidationReport validate_experiment(const ExperimentConfig& cfg);

/// Loaded and split data for dataset experiments.
struct PreparedData {
  std::shared_ptr<const Dataset> train;
  Dataset test;
  Partition partition;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

/// The objective each agent minimizes, plus what the summary needs.
struct PreparedProblem {
  Problem problem;
  std::optional<SigmoidNetSpec> net;
  std::optional<PreparedData> data;
  std::vector<double> initial;  // stacked
  std::vector<double> optimum;  // quadratic fixture: mean of centers
};

PreparedProblem prepare_problem(const ExperimentConfig& cfg);

struct ExperimentOutcome {
  RunResult run;
  double wall_seconds = 0.0;
  double final_risk = 0.0;      // sum of per-agent normalized risks
  double final_risk_sum = 0.0;  // unnormalized cross-entropy over all training samples
  std::vector<double> agent_error;                 // per agent, dataset experiments
  std::vector<std::vector<double>> agent_recall;   // per agent, per class
  std::optional<double> error_rate;                // mean of agent_error
  std::optional<double> average_model_error;       // error of the network-average weights
  std::uint64_t test_hash = 0;
};

/// Runs the configured pipeline. With `write_outputs`, writes metrics.csv,
/// summary.csv, partition.csv (dataset experiments), agent_<i>.ckpt and
/// state.ckpt under cfg.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_outputs = true);

/// key,value rows: results first, then `config.<key>` for every parameter.
void write_summary(std::ostream& out, const ExperimentConfig& cfg, const ExperimentOutcome& outcome);

using Summary = std::map<std::string, std::string, std::less<>>;
Summary read_summary(const std::filesystem::path& path);
Summary parse_summary(std::istream& in);

struct ComparisonRow {
  std::string name;
  double error_rate = 0.0;
  double final_risk = 0.0;
};

struct PairwiseDelta {
  std::string first, second;
  double error_delta_pp = 0.0;  // (second - first) in percentage points
  double risk_delta = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  std::vector<PairwiseDelta> deltas;
};

/// Needs at least two summaries with the same test_set_hash.
Comparison compare_runs(const std::vector<std::pair<std::string, Summary>>& summaries);
void write_comparison(std::ostream& out, const Comparison& c);

/// Row-wise mean of several metrics streams with identical k columns.
/// A column is empty in the result when it is empty in any input.
std::vector<MetricsRecord> average_metrics(const std::vector<std::vector<MetricsRecord>>& runs);

/// Runs `cfg` once per seed (oracle.seed and run.init_seed both set to the
/// seed) into <output_dir>/seed_<s>/, then writes the seed-averaged stream to
/// <output_dir>/metrics_mean.csv. Results are in seed order.
std::vector<ExperimentOutcome> run_seed_sweep(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds);

}  // namespace dsgd
