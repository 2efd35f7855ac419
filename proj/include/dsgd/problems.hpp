#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace dsgd {

/// One agent's empirical risk f_i(w) = (1/m_i) sum_j loss(w, sample_j).
class AgentObjective {
 public:
  virtual ~AgentObjective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t sample_count() const = 0;

  virtual double full_value(std::span<const double> w) const = 0;
  virtual void full_gradient(std::span<const double> w, std::span<double> out) const;
  /// Gradient of the loss of sample j alone.
  virtual void sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const = 0;
  /// Average of sample gradients over `indices` (repeats allowed).
  virtual void batch_gradient(std::span<const double> w, std::span<const std::size_t> indices,
                              std::span<double> out) const;
  /// full_value and full_gradient together; returns the value.
  virtual double value_and_gradient(std::span<const double> w, std::span<double> out) const;
};

using AgentObjectivePtr = std::shared_ptr<const AgentObjective>;

/// The network objective F(w) = sum_i f_i(w_i) over a stacked parameter vector.
struct Problem {
  std::size_t dim = 0;
  std::vector<AgentObjectivePtr> agents;

  Problem() = default;
  explicit Problem(std::vector<AgentObjectivePtr> agents);

  std::size_t agent_count() const noexcept { return agents.size(); }
  std::size_t stacked_size() const noexcept { return dim * agents.size(); }
};

/// sum_i f_i(w_i), with w_i the i-th block of `stacked`.
double aggregate_value(const Problem& p, std::span<const double> stacked);
/// Blockwise concatenation of grad f_i(w_i).
std::vector<double> aggregate_gradient(const Problem& p, std::span<const double> stacked);
void aggregate_gradient(const Problem& p, std::span<const double> stacked, std::span<double> out);

// ---------------------------------------------------------------------------
// Quadratic fixture

/// f(w) = (1/m) sum_j 0.5 * ||w - c_j||^2.
class QuadraticObjective final : public AgentObjective {
 public:
  explicit QuadraticObjective(std::vector<std::vector<double>> sample_centers);

  std::size_t dim() const override { return dim_; }
  std::size_t sample_count() const override { return centers_.size(); }
  double full_value(std::span<const double> w) const override;
  void full_gradient(std::span<const double> w, std::span<double> out) const override;
  void sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const override;

  /// Mean of the sample centers (the minimizer).
  const std::vector<double>& center() const noexcept { return mean_; }

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> centers_;
  std::vector<double> mean_;
};

/// One agent per center, one sample each: f_i(w) = 0.5 * ||w - c_i||^2.
Problem quadratic_problem(const std::vector<std::vector<double>>& centers);
/// Agent i averages over its own list of sample centers.
Problem quadratic_problem(const std::vector<std::vector<std::vector<double>>>& per_agent_samples);

// ---------------------------------------------------------------------------
// Double-well fixture (d_w = 1)

/// f(w) = 0.25 * (w^2 - 1)^2 + s * w, realized as the mean over samples
/// with linear coefficients s + offset_j. The offsets must average to 0.
class DoubleWellObjective final : public AgentObjective {
 public:
  explicit DoubleWellObjective(double shift, std::vector<double> sample_offsets = {0.0});

  std::size_t dim() const override { return 1; }
  std::size_t sample_count() const override { return offsets_.size(); }
  double full_value(std::span<const double> w) const override;
  void full_gradient(std::span<const double> w, std::span<double> out) const override;
  void sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const override;

 private:
  double shift_;
  std::vector<double> offsets_;
};

Problem double_well_problem(std::size_t n, const std::vector<double>& shifts);
/// As above with per-agent zero-mean sample offsets (one list per agent).
Problem double_well_problem(std::size_t n, const std::vector<double>& shifts,
                            const std::vector<std::vector<double>>& sample_offsets);

}  // namespace dsgd
