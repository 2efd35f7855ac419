#include "dsgd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>

#include "dsgd/diagnostics.hpp"
#include "dsgd/errors.hpp"

namespace dsgd {
namespace {

void mix_agent(const Graph& g, std::size_t i, double alpha, double beta, const double* w, const double* dir,
               std::size_t dim, double* next) {
  const double* wi = w + i * dim;
  const double* gi = dir + i * dim;
  double* out = next + i * dim;
  // out accumulates sum_j (w_i - w_j) first, then becomes the update.
  std::fill(out, out + dim, 0.0);
  for (auto j : g.neighbors(i)) {
    const double* wj = w + j * dim;
    for (std::size_t c = 0; c < dim; ++c) out[c] += wi[c] - wj[c];
  }
  for (std::size_t c = 0; c < dim; ++c) out[c] = wi[c] - beta * out[c] - alpha * gi[c];
}

void check_sizes(const Graph& g, std::span<const double> w, std::span<const double> dir, std::size_t dim,
                 std::span<double> next) {
  const std::size_t total = g.size() * dim;
  if (w.size() != total || dir.size() != total || next.size() != total) {
    throw InvalidArgument("mix_and_descend: length mismatch");
  }
}

}  // namespace

NetworkState::NetworkState(std::vector<double> stacked, std::size_t d, std::uint64_t oracle_seed)
    : dim(d), w(std::move(stacked)) {
  if (dim == 0 || w.size() % dim != 0) throw InvalidArgument("network state: length is not a multiple of dim");
  const std::size_t n = w.size() / dim;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.emplace_back(agent_seed(oracle_seed, i));
}

void mix_and_descend_serial(const Graph& g, double alpha, double beta, std::span<const double> w,
                            std::span<const double> directions, std::size_t dim, std::span<double> next) {
  check_sizes(g, w, directions, dim, next);
  for (std::size_t i = 0; i < g.size(); ++i) mix_agent(g, i, alpha, beta, w.data(), directions.data(), dim, next.data());
}

void mix_and_descend_parallel(const Graph& g, double alpha, double beta, std::span<const double> w,
                              std::span<const double> directions, std::size_t dim, std::span<double> next) {
  check_sizes(g, w, directions, dim, next);
  const auto n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    mix_agent(g, static_cast<std::size_t>(i), alpha, beta, w.data(), directions.data(), dim, next.data());
  }
}

void draw_directions(const Problem& p, const OracleConfig& o, NetworkState& state, std::span<double> directions,
                     Execution exec) {
  const std::size_t d = p.dim;
  const auto n = static_cast<std::ptrdiff_t>(p.agent_count());
  if (state.agent_count() != p.agent_count() || state.dim != d || directions.size() != state.w.size()) {
    throw InvalidArgument("draw_directions: state does not match problem");
  }
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(i);
      sample_direction(o, *p.agents[a], state.streams[a], state.block(a), directions.subspan(a * d, d));
    }
    return;
  }
  // Exceptions must not escape an OpenMP region; keep the first one.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto a = static_cast<std::size_t>(i);
    try {
      sample_direction(o, *p.agents[a], state.streams[a], state.block(a), directions.subspan(a * d, d));
    } catch (...) {
#pragma omp critical(dsgd_direction_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

Engine::Engine(const Graph& g, const StepSchedule& s, const Problem& p, const OracleConfig& o, Execution exec)
    : graph_(g), schedule_(s), problem_(p), oracle_(o), exec_(exec) {
  if (g.size() != p.agent_count()) throw InvalidArgument("engine: graph and problem disagree on agent count");
  std::size_t min_samples = SIZE_MAX;
  for (const auto& a : p.agents) min_samples = std::min(min_samples, a->sample_count());
  oracle_.validate(p.dim, min_samples);
  directions_.assign(p.stacked_size(), 0.0);
  next_.assign(p.stacked_size(), 0.0);
}

double Engine::step(NetworkState& state) {
  if (state.w.size() != problem_.stacked_size() || state.agent_count() != problem_.agent_count()) {
    throw InvalidArgument("engine: state does not match problem");
  }
  const double alpha = schedule_.alpha(state.k);
  const double beta = schedule_.beta(state.k);
  draw_directions(problem_, oracle_, state, directions_, exec_);
  if (exec_ == Execution::serial) {
    mix_and_descend_serial(graph_, alpha, beta, state.w, directions_, problem_.dim, next_);
  } else {
    mix_and_descend_parallel(graph_, alpha, beta, state.w, directions_, problem_.dim, next_);
  }

  const std::size_t d = problem_.dim;
  double step_norm = 0.0;
  for (std::size_t i = 0; i < problem_.agent_count(); ++i) {
    for (std::size_t c = i * d; c < (i + 1) * d; ++c) {
      if (!std::isfinite(next_[c])) throw DivergenceError(i, state.k);
      const double diff = next_[c] - state.w[c];
      step_norm += diff * diff;
    }
  }
  state.w.swap(next_);
  ++state.k;
  return step_norm;
}

MetricsRecord evaluate_metrics(const Graph& g, const StepSchedule& s, const Problem& p, const NetworkState& state,
                               bool consensus, Execution exec) {
  const std::size_t n = p.agent_count();
  const std::size_t d = p.dim;
  std::vector<double> values(n);
  std::vector<double> grad(p.stacked_size());
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto a = static_cast<std::size_t>(i);
      values[a] = p.agents[a]->value_and_gradient(state.block(a), std::span<double>(grad).subspan(a * d, d));
    }
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto a = static_cast<std::size_t>(i);
      values[a] = p.agents[a]->value_and_gradient(state.block(a), std::span<double>(grad).subspan(a * d, d));
    }
  }
  double risk = 0.0;
  for (double v : values) risk += v;

  MetricsRecord r;
  r.k = state.k;
  r.alpha = s.alpha(state.k);
  r.beta = s.beta(state.k);
  r.risk = risk;
  if (consensus) r.consensus_error = consensus_error(state.w, n, d);
  r.avg_grad_norm_sq = averaged_gradient_norm_sq(grad, n, d);
  r.lyapunov = lyapunov_from_value(risk, g, s.gamma(state.k), state.w, d);
  return r;
}

RunResult run(const Graph& g, const StepSchedule& s, const Problem& p, const OracleConfig& o, NetworkState initial,
              const RunOptions& options) {
  Engine engine(g, s, p, o, options.exec);
  RunResult result{std::move(initial), {}};
  auto emit = [&](MetricsRecord rec) {
    if (options.sink) options.sink(rec);
    result.metrics.push_back(std::move(rec));
  };
  const std::uint64_t cadence = options.cadence == 0 ? 1 : options.cadence;
  if (options.iterations == 0) {
    emit(evaluate_metrics(g, s, p, result.state, options.consensus_metrics, options.exec));
    return result;
  }
  for (std::uint64_t it = 0; it < options.iterations; ++it) {
    const bool record = it % cadence == 0 || it + 1 == options.iterations;
    std::optional<MetricsRecord> rec;
    if (record) rec = evaluate_metrics(g, s, p, result.state, options.consensus_metrics, options.exec);
    const double step_norm = engine.step(result.state);
    if (rec) {
      rec->step_norm_sq = step_norm;
      emit(std::move(*rec));
    }
  }
  return result;
}

RunResult centralized_run(const StepSchedule& s, const AgentObjectivePtr& pooled, const OracleConfig& o,
                          std::vector<double> initial, const RunOptions& options) {
  if (!pooled) throw InvalidArgument("centralized_run: null objective");
  const Graph single(TopologySpec::complete(1));
  const Problem problem({pooled});
  RunOptions opts = options;
  opts.consensus_metrics = false;
  return run(single, s, problem, o, NetworkState(std::move(initial), problem.dim, o.seed), opts);
}

}  // namespace dsgd
