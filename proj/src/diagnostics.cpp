#include "dsgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsgd/errors.hpp"

namespace dsgd {

double consensus_error(std::span<const double> stacked, std::size_t n, std::size_t dim) {
  if (n == 0 || stacked.size() != n * dim) throw InvalidArgument("consensus_error: length mismatch");
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < dim; ++c) mean[c] += stacked[i * dim + c];
  for (auto& v : mean) v /= static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = stacked[i * dim + c] - mean[c];
      total += d * d;
    }
  }
  return total;
}

double lyapunov_from_value(double risk, const Graph& g, double gamma, std::span<const double> stacked,
                           std::size_t dim) {
  if (!(gamma > 0.0)) throw InvalidArgument("lyapunov: gamma must be positive");
  return risk + laplacian_quadratic_form(g, stacked, dim) / (2.0 * gamma);
}

double lyapunov(const Problem& p, const Graph& g, const StepSchedule& s, std::uint64_t k,
                std::span<const double> stacked) {
  return lyapunov_from_value(aggregate_value(p, stacked), g, s.gamma(k), stacked, p.dim);
}

std::vector<double> lyapunov_gradient(const Problem& p, const Graph& g, const StepSchedule& s, std::uint64_t k,
                                      std::span<const double> stacked) {
  auto grad = aggregate_gradient(p, stacked);
  std::vector<double> lw(stacked.size());
  apply_laplacian(g, stacked, p.dim, lw);
  const double inv_gamma = 1.0 / s.gamma(k);
  for (std::size_t c = 0; c < grad.size(); ++c) grad[c] += inv_gamma * lw[c];
  return grad;
}

std::vector<double> averaged_gradient(const Problem& p, std::span<const double> stacked) {
  const auto grad = aggregate_gradient(p, stacked);
  const std::size_t n = p.agent_count();
  const std::size_t d = p.dim;
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) mean[c] += grad[i * d + c];
  for (auto& v : mean) v /= static_cast<double>(n);
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) std::copy(mean.begin(), mean.end(), out.begin() + static_cast<std::ptrdiff_t>(i * d));
  return out;
}

double averaged_gradient_norm_sq(std::span<const double> stacked_gradient, std::size_t n, std::size_t dim) {
  if (n == 0 || stacked_gradient.size() != n * dim) throw InvalidArgument("averaged_gradient_norm_sq: length mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += stacked_gradient[i * dim + c];
    mean /= static_cast<double>(n);
    total += mean * mean;
  }
  return static_cast<double>(n) * total;
}

RateFit fit_decay_rate(std::span<const std::pair<std::uint64_t, double>> series, std::uint64_t k_min,
                       std::uint64_t k_max) {
  if (!(k_min < k_max)) throw InvalidArgument("fit_decay_rate: empty window");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  std::size_t count = 0;
  for (auto [k, v] : series) {
    if (k < k_min || k > k_max) continue;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("fit_decay_rate: nonpositive value at k = " + std::to_string(k));
    }
    const double x = std::log(static_cast<double>(k) + 1.0);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++count;
  }
  if (count < 10) throw InvalidArgument("fit_decay_rate: need at least 10 points, got " + std::to_string(count));
  const double m = static_cast<double>(count);
  const double cxx = sxx - sx * sx / m;
  const double cxy = sxy - sx * sy / m;
  const double cyy = syy - sy * sy / m;
  if (!(cxx > 0.0)) throw InvalidArgument("fit_decay_rate: degenerate window");
  RateFit fit;
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / m;
  // A constant series is fit exactly by a flat line.
  fit.r_squared = cyy > 1e-300 ? std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0) : 1.0;
  fit.k_min = k_min;
  fit.k_max = k_max;
  return fit;
}

RateFit fit_decay_rate(std::span<const std::pair<std::uint64_t, double>> series, double burn_in) {
  if (series.empty()) throw InvalidArgument("fit_decay_rate: empty series");
  const std::uint64_t last = series.back().first;
  const auto k_min = static_cast<std::uint64_t>(std::ceil(burn_in * static_cast<double>(last)));
  return fit_decay_rate(series, k_min, last);
}

}  // namespace dsgd
