#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dsgd/graph.hpp"
#include "dsgd/problems.hpp"
#include "dsgd/schedule.hpp"

namespace dsgd {

/// ||(M (x) I_dim) w||^2 with M = I - (1/n) 11^T, i.e. sum_i ||w_i - mean||^2.
double consensus_error(std::span<const double> stacked, std::size_t n, std::size_t dim);

/// V(gamma_k, w) = F(w) + (1 / (2 gamma_k)) w^T (L (x) I) w.
double lyapunov(const Problem& p, const Graph& g, const StepSchedule& s, std::uint64_t k,
                std::span<const double> stacked);
/// Same with an explicit gamma and a precomputed F(w).
double lyapunov_from_value(double risk, const Graph& g, double gamma, std::span<const double> stacked,
                           std::size_t dim);

/// grad V = grad F(w) + (1 / gamma_k) (L (x) I) w.
std::vector<double> lyapunov_gradient(const Problem& p, const Graph& g, const StepSchedule& s,
                                      std::uint64_t k, std::span<const double> stacked);

/// (1/n)(11^T (x) I) grad F(w): every block holds the mean agent gradient.
std::vector<double> averaged_gradient(const Problem& p, std::span<const double> stacked);
/// ||averaged gradient||^2 = n * ||mean block||^2, from a stacked gradient.
double averaged_gradient_norm_sq(std::span<const double> stacked_gradient, std::size_t n, std::size_t dim);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::uint64_t k_min = 0;
  std::uint64_t k_max = 0;
};

/// Least-squares line through (log(k+1), log(value)) for points with
/// k in [k_min, k_max]. Needs at least 10 points, all values positive.
RateFit fit_decay_rate(std::span<const std::pair<std::uint64_t, double>> series, std::uint64_t k_min,
                       std::uint64_t k_max);
/// Window [burn_in * k_last, k_last] over the whole series.
RateFit fit_decay_rate(std::span<const std::pair<std::uint64_t, double>> series, double burn_in = 0.1);

}  // namespace dsgd
