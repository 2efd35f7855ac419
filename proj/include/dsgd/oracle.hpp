#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dsgd/problems.hpp"

namespace dsgd {

enum class OracleMode { single, minibatch, scaled };
enum class Sampling { with_replacement, without_replacement };

/// Constant positive-definite scaling H for the scaled direction. Either a
/// diagonal (length d) or a dense row-major d x d matrix.
struct Scaling {
  std::vector<double> diagonal;
  std::vector<double> dense;

  bool empty() const noexcept { return diagonal.empty() && dense.empty(); }
  void apply(std::span<const double> in, std::span<double> out) const;
};

struct OracleConfig {
  OracleMode mode = OracleMode::single;
  std::size_t batch = 1;
  Sampling sampling = Sampling::with_replacement;
  std::uint64_t seed = 0;
  Scaling scaling;

  std::size_t draws_per_call() const { return mode == OracleMode::single ? 1 : batch; }

  /// Throws InvalidArgument when the batch size is zero, exceeds m in
  /// without-replacement mode, or the scaling is not symmetric positive
  /// definite of dimension `dim`.
  void validate(std::size_t dim, std::size_t min_samples) const;
};

OracleMode parse_oracle_mode(std::string_view text);
Sampling parse_sampling(std::string_view text);
std::string_view to_string(OracleMode m);
std::string_view to_string(Sampling s);

/// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x);
/// Seed of agent `agent`'s stream, independent of evaluation order.
std::uint64_t agent_seed(std::uint64_t master, std::size_t agent);

/// Per-agent sample index source. Owned by one agent; never shared.
class SampleStream {
 public:
  SampleStream() = default;
  explicit SampleStream(std::uint64_t seed) : engine_(seed) {}

  /// Next `count` indices in [0, m). Without replacement, indices come from
  /// a reshuffled permutation of [0, m) that is refilled at epoch boundaries.
  void draw(std::size_t m, Sampling sampling, std::size_t count, std::vector<std::size_t>& out);

  bool operator==(const SampleStream&) const = default;

 private:
  std::size_t uniform_index(std::size_t m);

  std::mt19937_64 engine_;
  std::vector<std::size_t> permutation_;
  std::size_t cursor_ = 0;
};

/// Direction g_i(w_i): one sample gradient, a mini-batch average, or H times
/// a mini-batch average, depending on cfg.mode.
void sample_direction(const OracleConfig& cfg, const AgentObjective& agent, SampleStream& stream,
                      std::span<const double> w, std::span<double> out);

/// Mean of `trials` directions drawn from a fresh stream seeded by cfg.seed,
/// minus the full gradient.
std::vector<double> empirical_bias(const OracleConfig& cfg, const AgentObjective& agent,
                                   std::span<const double> w, std::size_t trials);

}  // namespace dsgd
