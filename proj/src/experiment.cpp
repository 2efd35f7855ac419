#include "dsgd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "dsgd/diagnostics.hpp"
#include "dsgd/errors.hpp"
#include "dsgd/io.hpp"

namespace dsgd {
namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "experiment",      "graph.topology",  "schedule.a",        "schedule.b",         "schedule.delta1",
    "schedule.delta2", "schedule.epsilon", "schedule.mode",    "oracle.mode",        "oracle.batch",
    "oracle.sampling", "oracle.seed",     "oracle.scaling",    "run.iterations",     "run.cadence",
    "run.init_seed",   "run.init_range",  "run.execution",     "data.format",        "data.images",
    "data.labels",     "data.features",   "data.label_csv",    "data.csv_header",    "data.d_in",
    "data.limit",      "data.train",      "data.split_seed",   "data.partition_seed", "net.hidden",
    "synthetic.dim",   "synthetic.samples", "synthetic.noise", "synthetic.shift",    "synthetic.seed",
    "output.dir"};

class Reader {
 public:
  explicit Reader(const Config& c) : c_(c) {}

  [[noreturn]] void fail(std::string_view key, const std::string& why) const {
    throw FormatError(c_.where(key) + ": key '" + std::string(key) + "': " + why);
  }

  std::optional<std::string> text(std::string_view key) const { return c_.get(key); }

  template <typename T>
  void number(std::string_view key, T& out) const {
    const auto v = c_.get(key);
    if (!v) return;
    T parsed{};
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
    if (ec != std::errc{} || ptr != v->data() + v->size()) fail(key, "not a number: '" + *v + "'");
    out = parsed;
  }

  void boolean(std::string_view key, bool& out) const {
    const auto v = c_.get(key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else fail(key, "expected true or false, got '" + *v + "'");
  }

  template <typename F>
  void parsed(std::string_view key, F&& f) const {
    const auto v = c_.get(key);
    if (!v) return;
    try {
      f(*v);
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

 private:
  const Config& c_;
};

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto cell = text.substr(0, comma);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) throw FormatError("bad number '" + std::string(cell) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

std::vector<double> uniform_block(std::size_t dim, std::uint64_t seed, double range) {
  std::mt19937_64 engine(mix_seed(seed));
  std::uniform_real_distribution<double> dist(-range, range);
  std::vector<double> w(dim);
  for (auto& v : w) v = dist(engine);
  return w;
}

// Zero-mean Gaussian offsets: draws minus their sample mean.
std::vector<double> centered_normals(std::mt19937_64& engine, std::size_t count, double scale) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(count);
  for (auto& x : v) x = scale * dist(engine);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(count);
  for (auto& x : v) x -= mean;
  return v;
}

std::size_t agent_count(const ExperimentConfig& cfg) {
  return cfg.kind == ExperimentKind::centralized ? 1 : cfg.topology.n;
}

Scaling parse_scaling(const std::string& text, std::size_t dim) {
  Scaling s;
  if (text.empty()) return s;
  const auto values = parse_list(text);
  if (values.size() == 1) s.diagonal.assign(dim, values.front());
  else if (values.size() == dim) s.diagonal = values;
  else if (values.size() == dim * dim) s.dense = values;
  else throw InvalidArgument("oracle.scaling needs 1, d_w or d_w*d_w values");
  return s;
}

}  // namespace

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "centralized") return ExperimentKind::centralized;
  if (text == "distributed-random") return ExperimentKind::distributed_random;
  if (text == "distributed-by-class") return ExperimentKind::distributed_by_class;
  if (text == "synthetic-quadratic") return ExperimentKind::synthetic_quadratic;
  if (text == "synthetic-doublewell") return ExperimentKind::synthetic_doublewell;
  throw InvalidArgument("unknown experiment '" + std::string(text) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::centralized: return "centralized";
    case ExperimentKind::distributed_random: return "distributed-random";
    case ExperimentKind::distributed_by_class: return "distributed-by-class";
    case ExperimentKind::synthetic_quadratic: return "synthetic-quadratic";
    case ExperimentKind::synthetic_doublewell: return "synthetic-doublewell";
  }
  return "?";
}

bool uses_dataset(ExperimentKind kind) {
  return kind == ExperimentKind::centralized || kind == ExperimentKind::distributed_random ||
         kind == ExperimentKind::distributed_by_class;
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  for (const auto& [key, value] : c.entries()) {
    if (!kKnownKeys.contains(key)) throw FormatError(c.where(key) + ": unknown key '" + key + "'");
  }
  Reader r(c);
  ExperimentConfig cfg;
  r.parsed("experiment", [&](const std::string& v) { cfg.kind = parse_experiment_kind(v); });
  if (uses_dataset(cfg.kind)) {
    cfg.init_range = 0.12;
    cfg.iterations = 3'000'000;
    cfg.cadence = 10'000;
  }
  r.parsed("graph.topology", [&](const std::string& v) { cfg.topology = TopologySpec::parse(v); });
  r.number("schedule.a", cfg.schedule.a);
  r.number("schedule.b", cfg.schedule.b);
  r.number("schedule.delta1", cfg.schedule.delta1);
  r.number("schedule.delta2", cfg.schedule.delta2);
  r.number("schedule.epsilon", cfg.schedule.epsilon);
  r.parsed("schedule.mode", [&](const std::string& v) { cfg.mode = parse_validation_mode(v); });
  r.parsed("oracle.mode", [&](const std::string& v) { cfg.oracle.mode = parse_oracle_mode(v); });
  r.number("oracle.batch", cfg.oracle.batch);
  r.parsed("oracle.sampling", [&](const std::string& v) { cfg.oracle.sampling = parse_sampling(v); });
  r.number("oracle.seed", cfg.oracle.seed);
  r.parsed("oracle.scaling", [&](const std::string& v) {
    parse_list(v);
    cfg.scaling_text = v;
  });
  r.number("run.iterations", cfg.iterations);
  r.number("run.cadence", cfg.cadence);
  r.number("run.init_seed", cfg.init_seed);
  r.number("run.init_range", cfg.init_range);
  r.parsed("run.execution", [&](const std::string& v) {
    if (v == "serial") cfg.exec = Execution::serial;
    else if (v == "parallel") cfg.exec = Execution::parallel;
    else throw InvalidArgument("expected serial or parallel");
  });
  r.parsed("data.format", [&](const std::string& v) {
    if (v != "idx" && v != "csv") throw InvalidArgument("expected idx or csv");
    cfg.data_format = v;
  });
  if (auto v = r.text("data.images")) cfg.images = *v;
  if (auto v = r.text("data.labels")) cfg.labels = *v;
  if (auto v = r.text("data.features")) cfg.features = *v;
  if (auto v = r.text("data.label_csv")) cfg.label_csv = *v;
  r.boolean("data.csv_header", cfg.csv_header);
  r.number("data.d_in", cfg.csv_d_in);
  r.number("data.limit", cfg.limit);
  r.number("data.train", cfg.n_train);
  r.number("data.split_seed", cfg.split_seed);
  r.number("data.partition_seed", cfg.partition_seed);
  r.number("net.hidden", cfg.hidden);
  r.number("synthetic.dim", cfg.synthetic_dim);
  r.number("synthetic.samples", cfg.synthetic_samples);
  r.number("synthetic.noise", cfg.synthetic_noise);
  r.number("synthetic.shift", cfg.synthetic_shift);
  r.number("synthetic.seed", cfg.synthetic_seed);
  if (auto v = r.text("output.dir")) cfg.output_dir = *v;

  if (cfg.hidden == 0) r.fail("net.hidden", "must be positive");
  if (cfg.synthetic_dim == 0) r.fail("synthetic.dim", "must be positive");
  if (cfg.synthetic_samples == 0) r.fail("synthetic.samples", "must be positive");
  if (!(cfg.init_range >= 0.0)) r.fail("run.init_range", "must be nonnegative");
  return cfg;
}

Config ExperimentConfig::to_config() const {
  Config c;
  auto num = [](double v) { return format_double(v); };
  c.set("experiment", std::string(to_string(kind)));
  c.set("graph.topology", topology.to_string());
  c.set("schedule.a", num(schedule.a));
  c.set("schedule.b", num(schedule.b));
  c.set("schedule.delta1", num(schedule.delta1));
  c.set("schedule.delta2", num(schedule.delta2));
  c.set("schedule.epsilon", num(schedule.epsilon));
  c.set("schedule.mode", std::string(to_string(mode)));
  c.set("oracle.mode", std::string(to_string(oracle.mode)));
  c.set("oracle.batch", std::to_string(oracle.batch));
  c.set("oracle.sampling", std::string(to_string(oracle.sampling)));
  c.set("oracle.seed", std::to_string(oracle.seed));
  if (!scaling_text.empty()) c.set("oracle.scaling", scaling_text);
  c.set("run.iterations", std::to_string(iterations));
  c.set("run.cadence", std::to_string(cadence));
  c.set("run.init_seed", std::to_string(init_seed));
  c.set("run.init_range", num(init_range));
  c.set("run.execution", exec == Execution::serial ? "serial" : "parallel");
  c.set("data.format", data_format);
  c.set("data.images", images.string());
  c.set("data.labels", labels.string());
  c.set("data.features", features.string());
  c.set("data.label_csv", label_csv.string());
  c.set("data.csv_header", csv_header ? "true" : "false");
  c.set("data.d_in", std::to_string(csv_d_in));
  c.set("data.limit", std::to_string(limit));
  c.set("data.train", std::to_string(n_train));
  c.set("data.split_seed", std::to_string(split_seed));
  c.set("data.partition_seed", std::to_string(partition_seed));
  c.set("net.hidden", std::to_string(hidden));
  c.set("synthetic.dim", std::to_string(synthetic_dim));
  c.set("synthetic.samples", std::to_string(synthetic_samples));
  c.set("synthetic.noise", num(synthetic_noise));
  c.set("synthetic.shift", num(synthetic_shift));
  c.set("synthetic.seed", std::to_string(synthetic_seed));
  c.set("output.dir", output_dir.string());
  return c;
}

ValidationReport validate_experiment(const ExperimentConfig& cfg) {
  ValidationReport report = validate_schedule(cfg.schedule, cfg.mode);
  auto add = [&](std::string name, bool passed, std::string detail = {}) {
    report.checks.push_back({std::move(name), passed ? Status::ok : Status::fail, std::move(detail)});
  };

  if (cfg.kind != ExperimentKind::centralized) {
    try {
      const Graph g(cfg.topology);
      const bool connected = is_connected(g);
      add("graph connected", connected, cfg.topology.to_string());
      if (connected && cfg.schedule.b > 0.0) {
        const auto mixing = validate_mixing(g, cfg.schedule.b, cfg.mode);
        report.checks.insert(report.checks.end(), mixing.checks.begin(), mixing.checks.end());
      }
    } catch (const std::exception& e) {
      add("graph well-formed", false, e.what());
    }
  }
  if (cfg.kind == ExperimentKind::distributed_by_class) {
    add("by-class partition uses 10 agents", cfg.topology.n == kClassCount,
        "agents = " + std::to_string(cfg.topology.n));
  }
  if (cfg.oracle.mode != OracleMode::single) add("oracle.batch >= 1", cfg.oracle.batch >= 1);
  if (cfg.oracle.mode == OracleMode::scaled) add("oracle.scaling given", !cfg.scaling_text.empty());
  if (uses_dataset(cfg.kind)) {
    auto exists = [&](const std::filesystem::path& p, const char* key) {
      add(std::string(key) + " exists", !p.empty() && std::filesystem::exists(p), p.string());
    };
    if (cfg.data_format == "idx") {
      exists(cfg.images, "data.images");
      exists(cfg.labels, "data.labels");
    } else {
      exists(cfg.features, "data.features");
      exists(cfg.label_csv, "data.label_csv");
    }
    add("data.train <= data.limit", cfg.n_train <= cfg.limit,
        std::to_string(cfg.n_train) + " of " + std::to_string(cfg.limit));
  }
  return report;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  Dataset all = cfg.data_format == "idx" ? load_idx(cfg.images, cfg.labels)
                                         : load_matrix_csv(cfg.features, cfg.label_csv, cfg.csv_d_in, cfg.csv_header);
  if (cfg.limit < all.size()) all = take_random_subset(all, cfg.limit, cfg.split_seed);
  auto split = split_train_test(all, std::min(cfg.n_train, all.size()), cfg.split_seed + 1);
  PreparedData out;
  auto train = std::make_shared<const Dataset>(std::move(split.train));
  out.test = std::move(split.test);
  switch (cfg.kind) {
    case ExperimentKind::centralized: out.partition = partition_random_equal(train->size(), 1, cfg.partition_seed); break;
    case ExperimentKind::distributed_random:
      out.partition = partition_random_equal(train->size(), cfg.topology.n, cfg.partition_seed);
      break;
    case ExperimentKind::distributed_by_class: out.partition = partition_by_class(*train, cfg.topology.n); break;
    default: throw InvalidArgument("prepare_data: experiment does not use a dataset");
  }
  out.train = std::move(train);
  return out;
}

PreparedProblem prepare_problem(const ExperimentConfig& cfg) {
  PreparedProblem out;
  const std::size_t n = agent_count(cfg);
  if (n == 0) throw InvalidArgument("experiment: no agents");
  std::vector<AgentObjectivePtr> agents;

  if (uses_dataset(cfg.kind)) {
    auto data = prepare_data(cfg);
    SigmoidNetSpec spec{data.train->input_dim(), cfg.hidden, kClassCount};
    for (const auto& idx : data.partition.assignment) agents.push_back(std::make_shared<NeuralNetObjective>(spec, data.train, idx));
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = nn_initial_weights(spec, agent_seed(cfg.init_seed, i), cfg.init_range);
      out.initial.insert(out.initial.end(), w.begin(), w.end());
    }
    out.net = spec;
    out.data = std::move(data);
  } else if (cfg.kind == ExperimentKind::synthetic_quadratic) {
    std::mt19937_64 engine(mix_seed(cfg.synthetic_seed));
    std::uniform_real_distribution<double> center_dist(-1.0, 1.0);
    const std::size_t d = cfg.synthetic_dim;
    out.optimum.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> center(d);
      for (auto& v : center) v = center_dist(engine);
      std::vector<std::vector<double>> samples(cfg.synthetic_samples, center);
      for (std::size_t c = 0; c < d; ++c) {
        const auto offsets = centered_normals(engine, cfg.synthetic_samples, cfg.synthetic_noise);
        for (std::size_t j = 0; j < samples.size(); ++j) samples[j][c] += offsets[j];
      }
      auto agent = std::make_shared<QuadraticObjective>(std::move(samples));
      for (std::size_t c = 0; c < d; ++c) out.optimum[c] += agent->center()[c] / static_cast<double>(n);
      agents.push_back(std::move(agent));
    }
  } else {
    std::mt19937_64 engine(mix_seed(cfg.synthetic_seed));
    for (std::size_t i = 0; i < n; ++i) {
      // Shifts spread symmetrically over [-shift, shift]; they sum to zero.
      const double shift = n > 1 ? cfg.synthetic_shift * (2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0) : 0.0;
      agents.push_back(std::make_shared<DoubleWellObjective>(
          shift, centered_normals(engine, cfg.synthetic_samples, cfg.synthetic_noise)));
    }
  }

  out.problem = Problem(std::move(agents));
  if (out.initial.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = uniform_block(out.problem.dim, agent_seed(cfg.init_seed, i), cfg.init_range);
      out.initial.insert(out.initial.end(), w.begin(), w.end());
    }
  }
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
  const auto report = validate_experiment(cfg);
  if (!report.accepted()) throw InvalidArgument("configuration rejected:\n" + report.to_string());

  auto prepared = prepare_problem(cfg);
  OracleConfig oracle = cfg.oracle;
  oracle.scaling = parse_scaling(cfg.scaling_text, prepared.problem.dim);

  std::ofstream metrics_file;
  if (write_outputs) {
    std::filesystem::create_directories(cfg.output_dir);
    metrics_file.open(cfg.output_dir / "metrics.csv");
    if (!metrics_file) throw FormatError("cannot write " + (cfg.output_dir / "metrics.csv").string());
    write_metrics_header(metrics_file);
    if (prepared.data) {
      std::ofstream part(cfg.output_dir / "partition.csv");
      write_partition_csv(part, prepared.data->partition);
    }
  }

  RunOptions opts;
  opts.iterations = cfg.iterations;
  opts.cadence = cfg.cadence;
  opts.exec = cfg.exec;
  if (write_outputs) opts.sink = [&](const MetricsRecord& r) {
    write_metrics_row(metrics_file, r);
    if (!metrics_file) throw FormatError("metrics: write failed");
  };

  ExperimentOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  if (cfg.kind == ExperimentKind::centralized) {
    outcome.run = centralized_run(cfg.schedule, prepared.problem.agents.front(), oracle, prepared.initial, opts);
  } else {
    const Graph g(cfg.topology);
    NetworkState initial(prepared.initial, prepared.problem.dim, oracle.seed);
    outcome.run = run(g, cfg.schedule, prepared.problem, oracle, std::move(initial), opts);
  }
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto& state = outcome.run.state;
  const std::size_t n = prepared.problem.agent_count();
  const std::size_t d = prepared.problem.dim;
  outcome.final_risk = aggregate_value(prepared.problem, state.w);
  outcome.final_risk_sum = outcome.final_risk;
  if (prepared.net) {
    const auto& spec = *prepared.net;
    const auto& test = prepared.data->test;
    outcome.test_hash = test.content_hash();
    outcome.final_risk_sum = 0.0;
    double error_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& agent = static_cast<const NeuralNetObjective&>(*prepared.problem.agents[i]);
      outcome.final_risk_sum += agent.total_loss(state.block(i));
      if (test.empty()) continue;
      outcome.agent_error.push_back(error_rate(spec, state.block(i), test));
      outcome.agent_recall.push_back(per_class_recall(spec, state.block(i), test));
      error_sum += outcome.agent_error.back();
    }
    if (!test.empty()) {
      outcome.error_rate = error_sum / static_cast<double>(n);
      std::vector<double> mean(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) mean[c] += state.w[i * d + c] / static_cast<double>(n);
      outcome.average_model_error = error_rate(spec, mean, test);
    }
  }

  if (write_outputs) {
    metrics_file.close();
    for (std::size_t i = 0; i < n; ++i) {
      save_checkpoint(cfg.output_dir / ("agent_" + std::to_string(i) + ".ckpt"), state.block(i));
    }
    save_checkpoint(cfg.output_dir / "state.ckpt", state.w);
    std::ofstream summary(cfg.output_dir / "summary.csv");
    write_summary(summary, cfg, outcome);
    if (!summary) throw FormatError("cannot write summary.csv");
  }
  return outcome;
}

void write_summary(std::ostream& out, const ExperimentConfig& cfg, const ExperimentOutcome& o) {
  const auto& state = o.run.state;
  out << "key,value\n";
  out << "experiment," << to_string(cfg.kind) << '\n';
  out << "iterations_completed," << state.k << '\n';
  out << "agents," << state.agent_count() << '\n';
  out << "final_risk," << format_double(o.final_risk) << '\n';
  out << "final_risk_sum," << format_double(o.final_risk_sum) << '\n';
  if (cfg.kind != ExperimentKind::centralized) {
    out << "final_consensus_error," << format_double(consensus_error(state.w, state.agent_count(), state.dim)) << '\n';
  }
  if (o.error_rate) {
    out << "error_rate," << format_double(*o.error_rate) << '\n';
    out << "error_rate_worst," << format_double(*std::max_element(o.agent_error.begin(), o.agent_error.end())) << '\n';
    out << "average_model_error," << format_double(o.average_model_error.value_or(0.0)) << '\n';
    for (std::size_t i = 0; i < o.agent_error.size(); ++i) {
      out << "agent." << i << ".error_rate," << format_double(o.agent_error[i]) << '\n';
      out << "agent." << i << ".recall,\"";
      for (std::size_t k = 0; k < o.agent_recall[i].size(); ++k) {
        out << (k ? ";" : "") << format_double(o.agent_recall[i][k]);
      }
      out << "\"\n";
    }
  }
  out << "test_set_hash," << o.test_hash << '\n';
  out << "wall_seconds," << format_double(o.wall_seconds) << '\n';
  const Config echo = cfg.to_config();
  for (const auto& [key, value] : echo.entries()) {
    out << "config." << key << ',';
    if (value.find(',') != std::string::npos) out << '"' << value << '"';
    else out << value;
    out << '\n';
  }
}

Summary parse_summary(std::istream& in) {
  Summary s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line == "key,value")) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("summary: line " + std::to_string(line_no) + " has no value");
    std::string value = line.substr(comma + 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    s[line.substr(0, comma)] = std::move(value);
  }
  return s;
}

Summary read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_summary(in);
}

Comparison compare_runs(const std::vector<std::pair<std::string, Summary>>& summaries) {
  if (summaries.size() < 2) throw InvalidArgument("compare: need at least two summaries");
  auto field = [](const std::pair<std::string, Summary>& s, const char* key) {
    auto it = s.second.find(key);
    if (it == s.second.end()) throw FormatError("compare: " + s.first + " has no " + key);
    return it->second;
  };
  auto number = [&](const std::pair<std::string, Summary>& s, const char* key) {
    const auto text = field(s, key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{}) throw FormatError("compare: " + s.first + ": bad " + key);
    return v;
  };
  const auto hash = field(summaries.front(), "test_set_hash");
  Comparison c;
  for (const auto& s : summaries) {
    if (field(s, "test_set_hash") != hash) {
      throw InvalidArgument("compare: " + s.first + " was evaluated on a different test set");
    }
    c.rows.push_back({s.first, number(s, "error_rate"), number(s, "final_risk_sum")});
  }
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < c.rows.size(); ++j) {
      c.deltas.push_back({c.rows[i].name, c.rows[j].name, 100.0 * (c.rows[j].error_rate - c.rows[i].error_rate),
                          c.rows[j].final_risk - c.rows[i].final_risk});
    }
  }
  return c;
}

void write_comparison(std::ostream& out, const Comparison& c) {
  out << "run,error_rate_pct,final_risk_sum\n";
  for (const auto& r : c.rows) out << r.name << ',' << format_double(100.0 * r.error_rate) << ',' << format_double(r.final_risk) << '\n';
  out << "first,second,error_delta_pp,risk_delta\n";
  for (const auto& d : c.deltas) {
    out << d.first << ',' << d.second << ',' << format_double(d.error_delta_pp) << ',' << format_double(d.risk_delta) << '\n';
  }
}

std::vector<MetricsRecord> average_metrics(const std::vector<std::vector<MetricsRecord>>& runs) {
  if (runs.empty()) return {};
  const auto& first = runs.front();
  for (const auto& r : runs) {
    if (r.size() != first.size()) throw InvalidArgument("average_metrics: streams differ in length");
    for (std::size_t row = 0; row < r.size(); ++row)
      if (r[row].k != first[row].k) throw InvalidArgument("average_metrics: streams differ in k");
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  auto mean = [&](std::size_t row, std::optional<double> MetricsRecord::*field) -> std::optional<double> {
    double total = 0.0;
    for (const auto& r : runs) {
      if (!(r[row].*field)) return std::nullopt;
      total += *(r[row].*field);
    }
    return total * inv;
  };
  std::vector<MetricsRecord> out(first.size());
  for (std::size_t row = 0; row < first.size(); ++row) {
    out[row].k = first[row].k;
    out[row].alpha = first[row].alpha;
    out[row].beta = first[row].beta;
    out[row].risk = mean(row, &MetricsRecord::risk);
    out[row].consensus_error = mean(row, &MetricsRecord::consensus_error);
    out[row].avg_grad_norm_sq = mean(row, &MetricsRecord::avg_grad_norm_sq);
    out[row].lyapunov = mean(row, &MetricsRecord::lyapunov);
    out[row].step_norm_sq = mean(row, &MetricsRecord::step_norm_sq);
  }
  return out;
}

std::vector<ExperimentOutcome> run_seed_sweep(const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw InvalidArgument("seed sweep: no seeds");
  std::vector<ExperimentOutcome> outcomes;
  std::vector<std::vector<MetricsRecord>> streams;
  for (auto seed : seeds) {
    ExperimentConfig c = cfg;
    c.oracle.seed = seed;
    c.init_seed = seed;
    c.output_dir = cfg.output_dir / ("seed_" + std::to_string(seed));
    outcomes.push_back(run_experiment(c, true));
    streams.push_back(outcomes.back().run.metrics);
  }
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / "metrics_mean.csv");
  write_metrics_header(out);
  for (const auto& r : average_metrics(streams)) write_metrics_row(out, r);
  return outcomes;
}

}  // namespace dsgd
