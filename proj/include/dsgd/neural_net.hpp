#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "dsgd/data.hpp"
#include "dsgd/problems.hpp"

namespace dsgd {

/// Single-hidden-layer network with per-class sigmoid outputs
///
///   y_k(x, w) = h( sum_{j=0}^{H} W2[k][j] * h( sum_{i=0}^{D} W1[j][i] * x_i ) ),
///
/// where x_0 = 1 and the hidden unit 0 is a constant 1 (biases), h is the
/// logistic function. Parameters are W1 (H x (D+1)) row-major followed by
/// W2 (C x (H+1)) row-major.
struct SigmoidNetSpec {
  std::size_t d_in = 400;
  std::size_t d_hidden = 50;
  std::size_t d_out = 10;

  std::size_t first_layer_size() const { return d_hidden * (d_in + 1); }
  std::size_t second_layer_size() const { return d_out * (d_hidden + 1); }
  std::size_t dim() const { return first_layer_size() + second_layer_size(); }
};

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

/// Outputs are clamped to [kOutputClamp, 1 - kOutputClamp] inside the
/// logarithms of the cross-entropy only.
inline constexpr double kOutputClamp = 1e-12;

struct LabeledSample {
  std::span<const double> x;       // d_in
  std::span<const double> target;  // one-hot, d_out
};

std::vector<double> nn_forward(const SigmoidNetSpec& spec, std::span<const double> w,
                               std::span<const double> x);

struct RiskAndGradient {
  double risk = 0.0;
  std::vector<double> gradient;
};

/// Batch-averaged cross-entropy and its backpropagated gradient.
RiskAndGradient nn_risk_and_gradient(const SigmoidNetSpec& spec, std::span<const double> w,
                                     std::span<const LabeledSample> batch);

/// Cross-entropy of one sample with integer label; when `grad` is non-empty,
/// adds `scale` times the sample's gradient into it. Inputs equal to zero are
/// skipped in the first layer.
double nn_accumulate(const SigmoidNetSpec& spec, std::span<const double> w, std::span<const double> x,
                     std::size_t label, std::span<double> grad, double scale);

/// argmax_k y_k, ties to the smallest class.
std::size_t nn_predict(const SigmoidNetSpec& spec, std::span<const double> w, std::span<const double> x);

/// Uniform initialization on [-range, range].
std::vector<double> nn_initial_weights(const SigmoidNetSpec& spec, std::uint64_t seed, double range = 0.12);

/// An agent's slice of a shared dataset.
class NeuralNetObjective final : public AgentObjective {
 public:
  NeuralNetObjective(SigmoidNetSpec spec, std::shared_ptr<const Dataset> data, std::vector<std::size_t> indices);

  std::size_t dim() const override { return spec_.dim(); }
  std::size_t sample_count() const override { return indices_.size(); }
  double full_value(std::span<const double> w) const override;
  void full_gradient(std::span<const double> w, std::span<double> out) const override;
  void sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const override;
  void batch_gradient(std::span<const double> w, std::span<const std::size_t> indices,
                      std::span<double> out) const override;
  double value_and_gradient(std::span<const double> w, std::span<double> out) const override;

  /// Unnormalized cross-entropy summed over this agent's samples.
  double total_loss(std::span<const double> w) const;

  const SigmoidNetSpec& spec() const noexcept { return spec_; }

 private:
  SigmoidNetSpec spec_;
  std::shared_ptr<const Dataset> data_;
  std::vector<std::size_t> indices_;
};

/// Per-class recall on `test`: correctly classified / present, NaN for absent classes.
std::vector<double> per_class_recall(const SigmoidNetSpec& spec, std::span<const double> w, const Dataset& test);

/// Misclassified fraction on `test`. Throws on an empty set.
double error_rate(const SigmoidNetSpec& spec, std::span<const double> w, const Dataset& test);

}  // namespace dsgd
