#include "dsgd/neural_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dsgd/errors.hpp"
#include "dsgd/oracle.hpp"

namespace dsgd {
namespace {

void check_shapes(const SigmoidNetSpec& spec, std::span<const double> w, std::span<const double> x) {
  if (w.size() != spec.dim()) throw InvalidArgument("network: parameter length mismatch");
  if (x.size() != spec.d_in) throw InvalidArgument("network: input length mismatch");
}

std::size_t one_hot_label(std::span<const double> target, std::size_t classes) {
  if (target.size() != classes) throw InvalidArgument("network: target length mismatch");
  std::size_t label = classes;
  for (std::size_t k = 0; k < classes; ++k) {
    if (target[k] == 1.0) {
      if (label != classes) throw InvalidArgument("network: target is not one-hot");
      label = k;
    } else if (target[k] != 0.0) {
      throw InvalidArgument("network: target is not one-hot");
    }
  }
  if (label == classes) throw InvalidArgument("network: target is not one-hot");
  return label;
}

struct Activations {
  std::vector<double> hidden;  // d_hidden, without the bias unit
  std::vector<double> output;  // d_out
};

// Forward pass over the nonzero inputs only.
void forward(const SigmoidNetSpec& spec, const double* w, std::span<const double> x,
             std::span<const std::size_t> nonzero, Activations& act) {
  const std::size_t stride1 = spec.d_in + 1;
  act.hidden.resize(spec.d_hidden);
  for (std::size_t j = 0; j < spec.d_hidden; ++j) {
    const double* row = w + j * stride1;
    double a = row[0];
    for (auto i : nonzero) a += row[i + 1] * x[i];
    act.hidden[j] = sigmoid(a);
  }
  const double* w2 = w + spec.first_layer_size();
  const std::size_t stride2 = spec.d_hidden + 1;
  act.output.resize(spec.d_out);
  for (std::size_t k = 0; k < spec.d_out; ++k) {
    const double* row = w2 + k * stride2;
    double z = row[0];
    for (std::size_t j = 0; j < spec.d_hidden; ++j) z += row[j + 1] * act.hidden[j];
    act.output[k] = sigmoid(z);
  }
}

double cross_entropy(std::span<const double> y, std::size_t label) {
  double loss = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double p = std::clamp(y[k], kOutputClamp, 1.0 - kOutputClamp);
    loss -= k == label ? std::log(p) : std::log(1.0 - p);
  }
  return loss;
}

std::vector<std::size_t> nonzero_inputs(std::span<const double> x) {
  std::vector<std::size_t> nz;
  nz.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) nz.push_back(i);
  return nz;
}

}  // namespace

std::vector<double> nn_forward(const SigmoidNetSpec& spec, std::span<const double> w, std::span<const double> x) {
  check_shapes(spec, w, x);
  Activations act;
  const auto nz = nonzero_inputs(x);
  forward(spec, w.data(), x, nz, act);
  return act.output;
}

double nn_accumulate(const SigmoidNetSpec& spec, std::span<const double> w, std::span<const double> x,
                     std::size_t label, std::span<double> grad, double scale) {
  check_shapes(spec, w, x);
  if (label >= spec.d_out) throw InvalidArgument("network: label out of range");
  thread_local Activations act;
  thread_local std::vector<std::size_t> nz;
  thread_local std::vector<double> delta_hidden;
  nz.clear();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) nz.push_back(i);
  forward(spec, w.data(), x, nz, act);
  const double loss = cross_entropy(act.output, label);
  if (grad.empty()) return loss;
  if (grad.size() != spec.dim()) throw InvalidArgument("network: gradient length mismatch");

  // Output pre-activation error for sigmoid + cross-entropy is y - t.
  const std::size_t stride1 = spec.d_in + 1;
  const std::size_t stride2 = spec.d_hidden + 1;
  const double* w2 = w.data() + spec.first_layer_size();
  double* g2 = grad.data() + spec.first_layer_size();
  delta_hidden.assign(spec.d_hidden, 0.0);
  for (std::size_t k = 0; k < spec.d_out; ++k) {
    const double dz = scale * (act.output[k] - (k == label ? 1.0 : 0.0));
    double* grow = g2 + k * stride2;
    const double* wrow = w2 + k * stride2;
    grow[0] += dz;
    for (std::size_t j = 0; j < spec.d_hidden; ++j) {
      grow[j + 1] += dz * act.hidden[j];
      delta_hidden[j] += dz * wrow[j + 1];
    }
  }
  for (std::size_t j = 0; j < spec.d_hidden; ++j) {
    const double h = act.hidden[j];
    const double da = delta_hidden[j] * h * (1.0 - h);
    double* grow = grad.data() + j * stride1;
    grow[0] += da;
    for (auto i : nz) grow[i + 1] += da * x[i];
  }
  return loss;
}

RiskAndGradient nn_risk_and_gradient(const SigmoidNetSpec& spec, std::span<const double> w,
                                     std::span<const LabeledSample> batch) {
  if (batch.empty()) throw InvalidArgument("network: empty batch");
  RiskAndGradient out;
  out.gradient.assign(spec.dim(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    const auto label = one_hot_label(s.target, spec.d_out);
    out.risk += nn_accumulate(spec, w, s.x, label, out.gradient, scale);
  }
  out.risk *= scale;
  return out;
}

std::size_t nn_predict(const SigmoidNetSpec& spec, std::span<const double> w, std::span<const double> x) {
  const auto y = nn_forward(spec, w, x);
  return static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
}

std::vector<double> nn_initial_weights(const SigmoidNetSpec& spec, std::uint64_t seed, double range) {
  std::mt19937_64 engine(mix_seed(seed));
  std::uniform_real_distribution<double> dist(-range, range);
  std::vector<double> w(spec.dim());
  for (auto& v : w) v = dist(engine);
  return w;
}

NeuralNetObjective::NeuralNetObjective(SigmoidNetSpec spec, std::shared_ptr<const Dataset> data,
                                       std::vector<std::size_t> indices)
    : spec_(spec), data_(std::move(data)), indices_(std::move(indices)) {
  if (!data_) throw InvalidArgument("network objective: null dataset");
  if (data_->input_dim() != spec_.d_in) throw InvalidArgument("network objective: input width mismatch");
  if (indices_.empty()) throw InvalidArgument("network objective: no samples");
  for (auto idx : indices_)
    if (idx >= data_->size()) throw InvalidArgument("network objective: sample index out of range");
}

double NeuralNetObjective::total_loss(std::span<const double> w) const {
  double total = 0.0;
  for (auto idx : indices_) total += nn_accumulate(spec_, w, data_->features(idx), data_->label(idx), {}, 0.0);
  return total;
}

double NeuralNetObjective::full_value(std::span<const double> w) const {
  return total_loss(w) / static_cast<double>(indices_.size());
}

void NeuralNetObjective::full_gradient(std::span<const double> w, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const double scale = 1.0 / static_cast<double>(indices_.size());
  for (auto idx : indices_) nn_accumulate(spec_, w, data_->features(idx), data_->label(idx), out, scale);
}

double NeuralNetObjective::value_and_gradient(std::span<const double> w, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const double scale = 1.0 / static_cast<double>(indices_.size());
  double total = 0.0;
  for (auto idx : indices_) total += nn_accumulate(spec_, w, data_->features(idx), data_->label(idx), out, scale);
  return total * scale;
}

void NeuralNetObjective::sample_gradient(std::span<const double> w, std::size_t j, std::span<double> out) const {
  const auto idx = indices_.at(j);
  std::fill(out.begin(), out.end(), 0.0);
  nn_accumulate(spec_, w, data_->features(idx), data_->label(idx), out, 1.0);
}

void NeuralNetObjective::batch_gradient(std::span<const double> w, std::span<const std::size_t> indices,
                                        std::span<double> out) const {
  if (indices.empty()) throw InvalidArgument("batch_gradient: empty batch");
  std::fill(out.begin(), out.end(), 0.0);
  const double scale = 1.0 / static_cast<double>(indices.size());
  for (auto j : indices) {
    const auto idx = indices_.at(j);
    nn_accumulate(spec_, w, data_->features(idx), data_->label(idx), out, scale);
  }
}

std::vector<double> per_class_recall(const SigmoidNetSpec& spec, std::span<const double> w, const Dataset& test) {
  std::vector<double> hits(spec.d_out, 0.0), present(spec.d_out, 0.0);
  for (std::size_t s = 0; s < test.size(); ++s) {
    const auto label = test.label(s);
    present[label] += 1.0;
    if (nn_predict(spec, w, test.features(s)) == label) hits[label] += 1.0;
  }
  std::vector<double> recall(spec.d_out);
  for (std::size_t k = 0; k < spec.d_out; ++k)
    recall[k] = present[k] > 0.0 ? hits[k] / present[k] : std::numeric_limits<double>::quiet_NaN();
  return recall;
}

double error_rate(const SigmoidNetSpec& spec, std::span<const double> w, const Dataset& test) {
  if (test.empty()) throw InvalidArgument("error_rate: empty test set");
  std::size_t wrong = 0;
  for (std::size_t s = 0; s < test.size(); ++s)
    if (nn_predict(spec, w, test.features(s)) != test.label(s)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

}  // namespace dsgd
