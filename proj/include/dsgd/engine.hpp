#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dsgd/graph.hpp"
#include "dsgd/oracle.hpp"
#include "dsgd/problems.hpp"
#include "dsgd/schedule.hpp"

namespace dsgd {

/// Stacked parameters w = [w_1; ...; w_n], the iteration counter and one
/// sampling stream per agent.
struct NetworkState {
  std::uint64_t k = 0;
  std::size_t dim = 0;
  std::vector<double> w;
  std::vector<SampleStream> streams;

  NetworkState() = default;
  /// Streams are seeded from agent_seed(oracle_seed, i).
  NetworkState(std::vector<double> stacked, std::size_t dim, std::uint64_t oracle_seed);

  std::size_t agent_count() const noexcept { return streams.size(); }
  std::span<double> block(std::size_t i) { return {w.data() + i * dim, dim}; }
  std::span<const double> block(std::size_t i) const { return {w.data() + i * dim, dim}; }
};

enum class Execution { serial, parallel };

/// Runs synchronous rounds of
///   w_i <- w_i - beta_k sum_j a_ij (w_i - w_j) - alpha_k g_i(w_i),
/// with every neighbor read taken from the pre-step state.
class Engine {
 public:
  Engine(const Graph& g, const StepSchedule& s, const Problem& p, const OracleConfig& o,
         Execution exec = Execution::parallel);

  /// Advances one round and returns ||w_{k+1} - w_k||^2. Throws
  /// DivergenceError if any new entry is non-finite; the state is left at
  /// its pre-step value in that case.
  double step(NetworkState& state);

  /// Directions g_i drawn during the most recent step.
  std::span<const double> last_directions() const noexcept { return directions_; }

  const Graph& graph() const noexcept { return graph_; }
  const StepSchedule& schedule() const noexcept { return schedule_; }
  const Problem& problem() const noexcept { return problem_; }
  const OracleConfig& oracle() const noexcept { return oracle_; }

 private:
  const Graph& graph_;
  StepSchedule schedule_;
  const Problem& problem_;
  OracleConfig oracle_;
  Execution exec_;
  std::vector<double> directions_;
  std::vector<double> next_;
};

// Mixing kernels: next_i = w_i - beta * sum_{j in N(i)} (w_i - w_j) - alpha * g_i.
// The serial form is the reference; the OpenMP form splits agents over threads.
void mix_and_descend_serial(const Graph& g, double alpha, double beta, std::span<const double> w,
                            std::span<const double> directions, std::size_t dim, std::span<double> next);
void mix_and_descend_parallel(const Graph& g, double alpha, double beta, std::span<const double> w,
                              std::span<const double> directions, std::size_t dim, std::span<double> next);

/// Oracle draws for every agent, serial or one agent per OpenMP iteration.
void draw_directions(const Problem& p, const OracleConfig& o, NetworkState& state,
                     std::span<double> directions, Execution exec);

struct MetricsRecord {
  std::uint64_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> risk;
  std::optional<double> consensus_error;
  std::optional<double> avg_grad_norm_sq;
  std::optional<double> lyapunov;
  std::optional<double> step_norm_sq;
};

/// Computes risk, consensus error, averaged-gradient norm and Lyapunov value
/// at the state's current k. `consensus` = false leaves the consensus column
/// empty (centralized runs).
MetricsRecord evaluate_metrics(const Graph& g, const StepSchedule& s, const Problem& p,
                               const NetworkState& state, bool consensus = true,
                               Execution exec = Execution::parallel);

struct RunOptions {
  std::uint64_t iterations = 0;
  /// Rows at k = 0, every `cadence` iterations and k = K-1.
  std::uint64_t cadence = 100;
  Execution exec = Execution::parallel;
  bool consensus_metrics = true;
  /// Called for each row as soon as it is complete.
  std::function<void(const MetricsRecord&)> sink;
};

struct RunResult {
  NetworkState state;
  std::vector<MetricsRecord> metrics;
};

RunResult run(const Graph& g, const StepSchedule& s, const Problem& p, const OracleConfig& o,
              NetworkState initial, const RunOptions& options);

/// Single-node SGD w <- w - alpha_k g(w) on a pooled objective; identical to
/// run() on a one-agent graph, without the consensus column.
RunResult centralized_run(const StepSchedule& s, const AgentObjectivePtr& pooled, const OracleConfig& o,
                          std::vector<double> initial, const RunOptions& options);

}  // namespace dsgd
