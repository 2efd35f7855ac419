// Experiment runner: run, validate, compare and ratefit verbs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dsgd/diagnostics.hpp"
#include "dsgd/errors.hpp"
#include "dsgd/experiment.hpp"
#include "dsgd/io.hpp"

namespace {

dsgd::ExperimentConfig load_experiment(const std::string& path, const std::vector<std::string>& extras,
                                       const std::string& out_dir) {
  auto config = dsgd::Config::load(path);
  const auto unused = config.apply_overrides(extras);
  if (!unused.empty()) throw dsgd::FormatError("unrecognized argument '" + unused.front() + "'");
  if (!out_dir.empty()) config.set("output.dir", out_dir);
  return dsgd::ExperimentConfig::from_config(config);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  return seeds;
}

std::optional<double> column_value(const dsgd::MetricsRecord& r, const std::string& column) {
  if (column == "risk") return r.risk;
  if (column == "consensus_error") return r.consensus_error;
  if (column == "avg_grad_norm_sq") return r.avg_grad_norm_sq;
  if (column == "lyapunov") return r.lyapunov;
  if (column == "step_norm_sq") return r.step_norm_sq;
  throw dsgd::InvalidArgument("unknown metrics column '" + column + "'");
}

int cmd_run(const std::string& path, const std::vector<std::string>& extras, const std::string& out_dir,
            const std::string& seeds) {
  const auto cfg = load_experiment(path, extras, out_dir);
  const auto report = dsgd::validate_experiment(cfg);
  if (!report.accepted()) {
    std::cerr << "configuration rejected:\n" << report.to_string();
    return 2;
  }
  if (report.status() == dsgd::Status::warn) std::cerr << "warnings:\n" << report.to_string();
  if (!seeds.empty()) {
    const auto outcomes = dsgd::run_seed_sweep(cfg, parse_seeds(seeds));
    std::cout << "completed " << outcomes.size() << " seeds into " << cfg.output_dir.string() << '\n';
    return 0;
  }
  const auto outcome = dsgd::run_experiment(cfg);
  std::cout << "experiment " << dsgd::to_string(cfg.kind) << ": " << outcome.run.state.k << " iterations in "
            << outcome.wall_seconds << " s, final risk " << outcome.final_risk;
  if (outcome.error_rate) std::cout << ", error rate " << 100.0 * *outcome.error_rate << "%";
  std::cout << "\noutputs in " << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& extras) {
  const auto cfg = load_experiment(path, extras, {});
  const auto report = dsgd::validate_experiment(cfg);
  std::cout << report.to_string() << "status: " << dsgd::to_string(report.status()) << '\n';
  return report.accepted() ? 0 : 2;
}

int cmd_compare(const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, dsgd::Summary>> summaries;
  for (const auto& p : paths) summaries.emplace_back(p, dsgd::read_summary(p));
  dsgd::write_comparison(std::cout, dsgd::compare_runs(summaries));
  return 0;
}

int cmd_ratefit(const std::vector<std::string>& paths, const std::string& column, double burn_in,
                std::optional<std::uint64_t> k_min, std::optional<std::uint64_t> k_max) {
  std::vector<std::vector<dsgd::MetricsRecord>> runs;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw dsgd::FormatError("cannot open " + p);
    runs.push_back(dsgd::read_metrics_csv(in));
  }
  const auto mean = dsgd::average_metrics(runs);
  std::vector<std::pair<std::uint64_t, double>> series;
  for (const auto& r : mean) {
    if (auto v = column_value(r, column)) series.emplace_back(r.k, *v);
  }
  if (series.empty()) throw dsgd::InvalidArgument("column '" + column + "' has no values");
  const auto fit = (k_min || k_max)
                       ? dsgd::fit_decay_rate(series, k_min.value_or(0), k_max.value_or(series.back().first))
                       : dsgd::fit_decay_rate(series, burn_in);
  std::cout << "quantity,slope,r2,kmin,kmax,seeds\n"
            << column << ',' << dsgd::format_double(fit.slope) << ',' << dsgd::format_double(fit.r_squared) << ','
            << fit.k_min << ',' << fit.k_max << ',' << runs.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed consensus SGD simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds;
  auto* run = app.add_subcommand("run", "Run an experiment; --section.key=value overrides config entries");
  run->add_option("config", config_path, "Config file or a previous summary.csv")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  run->add_option("--seeds", seeds, "Comma-separated seeds for a Monte-Carlo sweep");
  run->allow_extras();

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Config file")->required();
  validate->allow_extras();

  std::vector<std::string> summaries;
  auto* compare = app.add_subcommand("compare", "Tabulate error rates and pairwise deltas");
  compare->add_option("summaries", summaries, "summary.csv files")->required()->expected(2, -1);

  std::vector<std::string> metrics;
  std::string column = "consensus_error";
  double burn_in = 0.1;
  std::optional<std::uint64_t> k_min, k_max;
  auto* ratefit = app.add_subcommand("ratefit", "Log-log decay fit of a metrics column (averaged over files)");
  ratefit->add_option("metrics", metrics, "metrics.csv files")->required();
  ratefit->add_option("--column", column, "Metrics column");
  ratefit->add_option("--burn-in", burn_in, "Fraction of iterations skipped");
  ratefit->add_option("--kmin", k_min, "Window start");
  ratefit->add_option("--kmax", k_max, "Window end");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, run->remaining(), out_dir, seeds);
    if (*validate) return cmd_validate(config_path, validate->remaining());
    if (*compare) return cmd_compare(summaries);
    if (*ratefit) return cmd_ratefit(metrics, column, burn_in, k_min, k_max);
  } catch (const dsgd::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
