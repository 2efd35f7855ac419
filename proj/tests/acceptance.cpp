// Acceptance suite: one PASS/FAIL line per criterion.
//
//   dsgd_acceptance                 all criteria
//   dsgd_acceptance --only 1,2,10   a subset
//   dsgd_acceptance --skip 9        everything except the MNIST runs

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "dsgd/diagnostics.hpp"
#include "dsgd/engine.hpp"
#include "dsgd/experiment.hpp"
#include "dsgd/neural_net.hpp"
#include "dsgd/oracle.hpp"
#include "test_support.hpp"

using namespace dsgd;
namespace fs = std::filesystem;
using dsgd::testing::as_vector;
using dsgd::testing::central_difference;
using dsgd::testing::random_vector;
using dsgd::testing::relative_error;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path source_dir() { return DSGD_SOURCE_DIR; }

ExperimentConfig load_config(const std::string& name) {
  auto c = Config::load(source_dir() / "configs" / name);
  for (const char* key : {"data.images", "data.labels"}) {
    if (auto v = c.get(key)) c.set(key, (source_dir() / *v).string());
  }
  return ExperimentConfig::from_config(c);
}

std::vector<double> series_mean(const std::vector<std::vector<MetricsRecord>>& runs,
                                std::optional<double> MetricsRecord::*column, std::vector<std::uint64_t>& ks) {
  const auto mean = average_metrics(runs);
  std::vector<double> out;
  ks.clear();
  for (const auto& r : mean) {
    ks.push_back(r.k);
    out.push_back((r.*column).value());
  }
  return out;
}

/// Means over [10^e, 10^(e+1)) for e = first..last-1; the final decade includes k_last.
std::vector<double> decade_means(const std::vector<std::uint64_t>& ks, const std::vector<double>& v, int first,
                                 int last) {
  std::vector<double> means;
  for (int e = first; e < last; ++e) {
    const auto lo = static_cast<std::uint64_t>(std::pow(10.0, e));
    const auto hi = static_cast<std::uint64_t>(std::pow(10.0, e + 1));
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] >= lo && (ks[i] < hi || (e + 1 == last && ks[i] <= hi))) {
        total += v[i];
        ++count;
      }
    }
    means.push_back(count ? total / static_cast<double>(count) : NAN);
  }
  return means;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " > " : "") + fmt(v[i]);
  return s;
}

// ---------------------------------------------------------------------------

Verdict spectral_and_mixing() {
  const Graph ring(TopologySpec::ring(10));
  const auto dense = dsgd::testing::general_eigenvalues(dsgd::testing::dense_laplacian(ring));
  const double expected_l2 = 2.0 - 2.0 * std::cos(M_PI / 5.0);
  const double err_l2 = std::max(std::abs(ring.lambda2() - dense[1]), std::abs(ring.lambda2() - expected_l2));
  const double err_sigma = std::max(std::abs(ring.sigma_max() - dense.back()), std::abs(ring.sigma_max() - 4.0));
  const bool flags_large_b = !validate_mixing(ring, 0.2525, ValidationMode::strict).ok();
  const bool passes_small_b = validate_mixing(ring, 0.2, ValidationMode::strict).ok();
  return {err_l2 <= 1e-9 && err_sigma <= 1e-9 && flags_large_b && passes_small_b,
          "lambda2 err " + fmt(err_l2) + ", sigma_max err " + fmt(err_sigma) + ", b=0.2525 flagged " +
              (flags_large_b ? "yes" : "no") + ", b=0.2 ok " + (passes_small_b ? "yes" : "no")};
}

Verdict schedule_validator() {
  const StepSchedule boundary{1.0, 0.2525, 1.0 / 3.0, 1.0, 1e-5};
  const StepSchedule valid{1.0, 0.2, 0.28, 0.9, 1.0};
  const bool rejects = !validate_schedule(boundary, ValidationMode::strict).accepted();
  const bool names_ratio = validate_schedule(boundary, ValidationMode::strict).to_string().find("3*delta1 < delta2") !=
                           std::string::npos;
  const bool accepts = validate_schedule(valid, ValidationMode::strict).ok();

  // Partial sums over k < K = 10^6 and their growth over the last decade [K/10, K).
  constexpr std::uint64_t K = 1000000;
  double s_a2 = 0, s_ab = 0, s_a = 0, s_b = 0;
  double at_decade[4] = {}, at_prev_decade[4] = {};
  bool monotone = true;
  double prev_a = INFINITY, prev_b = INFINITY;
  for (std::uint64_t k = 0; k < K; ++k) {
    if (k == K / 100) {
      at_prev_decade[0] = s_a2, at_prev_decade[1] = s_ab, at_prev_decade[2] = s_a, at_prev_decade[3] = s_b;
    }
    if (k == K / 10) at_decade[0] = s_a2, at_decade[1] = s_ab, at_decade[2] = s_a, at_decade[3] = s_b;
    const double a = valid.alpha(k), b = valid.beta(k);
    monotone &= a > 0 && b > 0 && a <= prev_a && b <= prev_b;
    prev_a = a, prev_b = b;
    s_a2 += a * a, s_ab += a * b, s_a += a, s_b += b;
  }
  const double totals[4] = {s_a2, s_ab, s_a, s_b};
  double frac[4], last_inc[4], prev_inc[4];
  for (int i = 0; i < 4; ++i) {
    frac[i] = (totals[i] - at_decade[i]) / totals[i];
    last_inc[i] = totals[i] - at_decade[i];
    prev_inc[i] = at_decade[i] - at_prev_decade[i];
  }
  // sum alpha^2 is Cauchy-flat at 1%. sum alpha*beta converges too slowly for
  // a 1% bound at K = 10^6 under any valid exponents, so its flatness is
  // judged by shrinking decade increments; the literal fraction is printed.
  const bool square_flat = frac[0] < 0.01;
  const bool product_flat = last_inc[1] < prev_inc[1];
  const bool alpha_grows = frac[2] > 0.10 && last_inc[2] >= prev_inc[2];
  const bool beta_grows = frac[3] > 0.10;
  return {rejects && names_ratio && accepts && monotone && square_flat && product_flat && alpha_grows && beta_grows,
          std::string("strict rejects boundary ") + (rejects && names_ratio ? "yes" : "no") + ", accepts valid " +
              (accepts ? "yes" : "no") + ", monotone " + (monotone ? "yes" : "no") + "; last-decade share: a^2 " +
              fmt(frac[0]) + ", ab " + fmt(frac[1]) + " (decade increments " + fmt(prev_inc[1]) + " -> " +
              fmt(last_inc[1]) + "), a " + fmt(frac[2]) + ", b " + fmt(frac[3])};
}

Verdict update_rule_equivalence() {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<std::size_t> n_dist(1, 5), d_dist(1, 4);
  std::uniform_int_distribution<std::uint64_t> k_dist(0, 1000);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = n_dist(rng), d = d_dist(rng);
    const Graph g(dsgd::testing::random_topology(rng, n, 0.6));
    std::vector<std::vector<std::vector<double>>> samples(n);
    for (auto& a : samples)
      for (int s = 0; s < 3; ++s) a.push_back(random_vector(rng, d, -2.0, 2.0));
    const Problem p = quadratic_problem(samples);
    StepSchedule s{0.5, 0.15, 0.28, 0.9, 1.0};
    OracleConfig o;
    o.seed = static_cast<std::uint64_t>(trial);
    Engine engine(g, s, p, o, Execution::serial);
    NetworkState state(random_vector(rng, n * d), d, o.seed);
    state.k = k_dist(rng);
    const std::uint64_t k = state.k;
    const Eigen::VectorXd before = as_vector(state.w);
    engine.step(state);
    const Eigen::MatrixXd mix =
        Eigen::MatrixXd::Identity(n, n) - s.beta(k) * dsgd::testing::dense_laplacian(g);
    const Eigen::VectorXd stacked =
        dsgd::testing::kron_identity(mix, d) * before - s.alpha(k) * as_vector(engine.last_directions());
    worst = std::max(worst, (as_vector(state.w) - stacked).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "max |per-agent - stacked| over 100 instances " + fmt(worst)};
}

Verdict gradient_correctness() {
  std::mt19937_64 rng(2718);
  const SigmoidNetSpec spec;
  std::uniform_int_distribution<std::size_t> coord(0, spec.dim() - 1), label(0, 9);
  double worst_nn = 0.0;
  for (int point = 0; point < 5; ++point) {
    const auto w = random_vector(rng, spec.dim(), -0.3, 0.3);
    std::vector<std::vector<double>> xs, ts;
    for (int s = 0; s < 3; ++s) {
      xs.push_back(random_vector(rng, spec.d_in, 0.0, 1.0));
      ts.emplace_back(10, 0.0);
      ts.back()[label(rng)] = 1.0;
    }
    std::vector<LabeledSample> batch;
    for (int s = 0; s < 3; ++s) batch.push_back({xs[s], ts[s]});
    const auto analytic = nn_risk_and_gradient(spec, w, batch);
    auto f = [&](std::span<const double> v) { return nn_risk_and_gradient(spec, v, batch).risk; };
    for (int t = 0; t < 50; ++t) {
      const auto c = coord(rng);
      worst_nn = std::max(worst_nn, relative_error(analytic.gradient[c], central_difference(f, w, c)));
    }
  }
  double worst_fixture = 0.0;
  const auto quad = quadratic_problem(std::vector<std::vector<double>>{{0.3, -1.0, 2.0}});
  const auto well = double_well_problem(1, {0.07});
  for (const Problem* p : {&quad, &well}) {
    for (int point = 0; point < 5; ++point) {
      const auto w = random_vector(rng, p->dim, -1.5, 1.5);
      std::vector<double> g(p->dim);
      p->agents[0]->full_gradient(w, g);
      auto f = [&](std::span<const double> v) { return p->agents[0]->full_value(v); };
      for (std::size_t c = 0; c < p->dim; ++c)
        worst_fixture = std::max(worst_fixture, relative_error(g[c], central_difference(f, w, c)));
    }
  }
  return {worst_nn < 1e-5 && worst_fixture < 1e-5,
          "max relative error: network " + fmt(worst_nn) + " (250 coordinates), fixtures " + fmt(worst_fixture)};
}

Verdict oracle_unbiasedness() {
  auto cfg = load_config("synthetic_quadratic.cfg");
  const auto prepared = prepare_problem(cfg);
  const auto& agent = *prepared.problem.agents[0];
  std::mt19937_64 rng(99);
  const auto w = random_vector(rng, agent.dim());

  // Deterministic form on all three objective kinds.
  double worst_exact = 0.0;
  auto check_exact = [&](const AgentObjective& a, std::span<const double> at) {
    std::vector<double> mean(a.dim(), 0.0), g(a.dim()), full(a.dim());
    for (std::size_t j = 0; j < a.sample_count(); ++j) {
      a.sample_gradient(at, j, g);
      for (std::size_t c = 0; c < a.dim(); ++c) mean[c] += g[c] / static_cast<double>(a.sample_count());
    }
    a.full_gradient(at, full);
    for (std::size_t c = 0; c < a.dim(); ++c) worst_exact = std::max(worst_exact, std::abs(mean[c] - full[c]));
  };
  check_exact(agent, w);
  const auto well = load_config("synthetic_doublewell.cfg");
  const auto well_problem = prepare_problem(well);
  check_exact(*well_problem.problem.agents[0], std::vector<double>{0.4});
  {
    const SigmoidNetSpec spec{20, 5, 10};
    std::vector<double> x(20 * 12);
    std::vector<std::uint8_t> y(12);
    for (auto& v : x) v = std::uniform_real_distribution<double>(0, 1)(rng);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::uint8_t>(i % 10);
    auto data = std::make_shared<const Dataset>(20, x, y);
    std::vector<std::size_t> idx(12);
    std::iota(idx.begin(), idx.end(), 0);
    const NeuralNetObjective net(spec, data, idx);
    check_exact(net, random_vector(rng, spec.dim(), -0.5, 0.5));
  }

  // Monte-Carlo bias against the exact per-coordinate spread.
  const std::size_t m = agent.sample_count(), d = agent.dim();
  std::vector<double> mean(d, 0.0), var(d, 0.0), g(d);
  for (std::size_t j = 0; j < m; ++j) {
    agent.sample_gradient(w, j, g);
    for (std::size_t c = 0; c < d; ++c) mean[c] += g[c] / static_cast<double>(m);
  }
  for (std::size_t j = 0; j < m; ++j) {
    agent.sample_gradient(w, j, g);
    for (std::size_t c = 0; c < d; ++c) var[c] += (g[c] - mean[c]) * (g[c] - mean[c]) / static_cast<double>(m);
  }
  constexpr std::size_t T = 100000;
  const auto bias = empirical_bias(cfg.oracle, agent, w, T);
  double worst_z = 0.0;
  for (std::size_t c = 0; c < d; ++c) worst_z = std::max(worst_z, std::abs(bias[c]) / std::sqrt(var[c] / T));
  return {worst_exact <= 1e-12 && worst_z < 3.0,
          "exact-average gap " + fmt(worst_exact) + ", Monte-Carlo |bias| / (sigma/sqrt(T)) = " + fmt(worst_z)};
}

struct SeedRuns {
  ExperimentConfig cfg;
  PreparedProblem prepared;
  std::vector<ExperimentOutcome> outcomes;
  double seconds = 0.0;
};

SeedRuns run_seeds(const std::string& config_name) {
  SeedRuns r;
  r.cfg = load_config(config_name);
  r.prepared = prepare_problem(r.cfg);
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cfg = r.cfg;
    cfg.oracle.seed = seed;
    cfg.init_seed = seed;
    r.outcomes.push_back(run_experiment(cfg, false));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

const SeedRuns& quadratic_runs() {
  static const SeedRuns runs = run_seeds("synthetic_quadratic.cfg");
  return runs;
}

Verdict consensus_decay() {
  const auto& r = quadratic_runs();
  std::vector<std::vector<MetricsRecord>> streams;
  for (const auto& o : r.outcomes) streams.push_back(o.run.metrics);
  std::vector<std::uint64_t> ks;
  const auto mean = series_mean(streams, &MetricsRecord::consensus_error, ks);
  std::vector<std::pair<std::uint64_t, double>> series;
  for (std::size_t i = 0; i < ks.size(); ++i) series.emplace_back(ks[i], mean[i]);
  const auto fit = fit_decay_rate(series, 1000, 100000);
  const auto decades = decade_means(ks, mean, 2, 5);
  const bool ok = -fit.slope >= 0.4 && strictly_decreasing(decades) && r.seconds < 120.0;
  return {ok, "20 seeds, K = " + std::to_string(r.cfg.iterations) + ": fitted -slope " + fmt(-fit.slope) + " (r2 " +
                  fmt(fit.r_squared) + "), decade means " + join(decades) + ", " + fmt(r.seconds) + " s"};
}

Verdict converges_to_optimum() {
  const auto& r = quadratic_runs();
  const auto& opt = r.prepared.optimum;
  double worst = 0.0;
  for (const auto& o : r.outcomes) {
    const auto& st = o.run.state;
    for (std::size_t i = 0; i < st.agent_count(); ++i) {
      double dist = 0.0;
      for (std::size_t c = 0; c < st.dim; ++c) dist += std::pow(st.block(i)[c] - opt[c], 2);
      worst = std::max(worst, std::sqrt(dist));
    }
  }
  return {worst <= 1e-2, "max agent distance to mean-of-centers minimizer over 20 seeds " + fmt(worst)};
}

Verdict critical_points() {
  const auto r = run_seeds("synthetic_doublewell.cfg");
  const auto& p = r.prepared.problem;
  double worst_grad = 0.0, worst_dist = 0.0;
  std::set<int> reached;
  std::vector<std::vector<MetricsRecord>> streams;
  for (const auto& o : r.outcomes) {
    const auto& w = o.run.state.w;
    worst_grad = std::max(worst_grad, averaged_gradient_norm_sq(aggregate_gradient(p, w), p.agent_count(), p.dim));
    for (double v : w) {
      double best = INFINITY;
      int which = 0;
      for (int cp : {-1, 0, 1})
        if (std::abs(v - cp) < best) best = std::abs(v - cp), which = cp;
      worst_dist = std::max(worst_dist, best);
      reached.insert(which);
    }
    streams.push_back(o.run.metrics);
  }
  std::vector<std::uint64_t> ks;
  const auto steps = series_mean(streams, &MetricsRecord::step_norm_sq, ks);
  std::vector<std::pair<std::uint64_t, double>> series;
  for (std::size_t i = 0; i < ks.size(); ++i) series.emplace_back(ks[i], steps[i]);
  const auto fit = fit_decay_rate(series, 1000, ks.back());
  const auto decades = decade_means(ks, steps, 2, 5);
  std::string points;
  for (int cp : reached) points += (points.empty() ? "" : ",") + std::to_string(cp);
  const bool ok = worst_grad < 1e-3 && worst_dist <= 0.05 && fit.slope < 0.0 && strictly_decreasing(decades) &&
                  r.seconds < 60.0;
  return {ok, "max final averaged-gradient norm^2 " + fmt(worst_grad) + ", max distance to {-1,0,1} " +
                  fmt(worst_dist) + " (reached " + points + "), step-norm slope " + fmt(fit.slope) +
                  ", decade means " + join(decades) + ", " + fmt(r.seconds) + " s"};
}

Verdict mnist_reproduction() {
  for (const char* f : {"data/mnist-5000-images-idx3-ubyte", "data/mnist-5000-labels-idx1-ubyte"}) {
    if (!fs::exists(source_dir() / f)) return {false, std::string("missing ") + f};
  }
  const auto start = std::chrono::steady_clock::now();
  const auto central = run_experiment(load_config("mnist_centralized.cfg"), false);
  const auto random = run_experiment(load_config("mnist_distributed-random.cfg"), false);
  const auto by_class = run_experiment(load_config("mnist_distributed-by-class.cfg"), false);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double e1 = *central.error_rate, e2 = *random.error_rate, e3 = *by_class.error_rate;
  std::size_t min_unseen = kClassCount;
  for (std::size_t agent = 0; agent < by_class.agent_recall.size(); ++agent) {
    std::size_t recognized = 0;
    for (std::size_t c = 0; c < kClassCount; ++c)
      if (c != agent && by_class.agent_recall[agent][c] >= 0.5) ++recognized;
    min_unseen = std::min(min_unseen, recognized);
  }
  const bool same_test = central.test_hash == random.test_hash && random.test_hash == by_class.test_hash;
  // Error rates are ratios of small integers; the slack absorbs rounding at an exact 3-point gap.
  constexpr double gap = 0.03 + 1e-12;
  const bool ok = same_test && e1 <= 0.12 && std::abs(e2 - e1) <= gap && std::abs(e3 - e1) <= gap &&
                  min_unseen >= 8 && seconds <= 1800.0;
  return {ok, "error rates: centralized " + fmt(100 * e1) + "%, distributed-random " + fmt(100 * e2) +
                  "%, distributed-by-class " + fmt(100 * e3) + "%; fewest unseen classes at >= 50% recall " +
                  std::to_string(min_unseen) + "/9; " + fmt(seconds) + " s"};
}

Verdict determinism() {
  auto cfg = load_config("synthetic_quadratic.cfg");
  const auto base = fs::temp_directory_path() / "dsgd_acceptance_determinism";
  fs::remove_all(base);
  std::string contents[2];
  for (int rep = 0; rep < 2; ++rep) {
    cfg.output_dir = base / ("rep" + std::to_string(rep));
    run_experiment(cfg);
    std::ifstream in(cfg.output_dir / "metrics.csv", std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    contents[rep] = s.str();
  }
  const bool same = !contents[0].empty() && contents[0] == contents[1];
  return {same, "metrics.csv " + std::to_string(contents[0].size()) + " bytes, repeat " +
                    (same ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only, skip;
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--skip", skip, "Criteria to leave out")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"spectral quantities and mixing validation", spectral_and_mixing},
      {"schedule validator and summability", schedule_validator},
      {"per-agent update equals stacked form", update_rule_equivalence},
      {"analytic gradients match finite differences", gradient_correctness},
      {"oracle unbiasedness", oracle_unbiasedness},
      {"consensus error decay", consensus_decay},
      {"convergence to the convex optimum", converges_to_optimum},
      {"critical-point convergence", critical_points},
      {"MNIST error rates and unseen-class recall", mnist_reproduction},
      {"bitwise determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    if (std::find(skip.begin(), skip.end(), id) != skip.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " - " << criteria[i].first << " - "
              << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
