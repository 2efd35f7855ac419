#pragma once

#include <cstdint>

#include "dsgd/validation.hpp"

namespace dsgd {

/// Diminishing step sizes
///   alpha_k = a / (eps*k + 1)^delta2,  beta_k = b / (eps*k + 1)^delta1,
/// with gamma_k = alpha_k / beta_k. eps = 1 gives the unscaled sequences.
struct StepSchedule {
  double a = 1.0;
  double b = 0.2;
  double delta1 = 0.28;
  double delta2 = 0.9;
  double epsilon = 1.0;

  double alpha(std::uint64_t k) const;
  double beta(std::uint64_t k) const;
  double gamma(std::uint64_t k) const;
  /// (a/b) / (eps*k + 1)^(delta2 - delta1), the closed form of gamma.
  double gamma_closed_form(std::uint64_t k) const;
};

/// Evaluates the step-size conditions
///   a > 0, b > 0, 0 < 3*delta1 < delta2 <= 1, delta1 + delta2 > 1, delta2 > 1/2.
/// Nonpositive a, b, delta1, delta2 or epsilon fail in both modes. In compat
/// mode the boundary 3*delta1 == delta2 is a warning. delta2 > 2*delta1 is
/// reported informationally.
ValidationReport validate_schedule(const StepSchedule& s, ValidationMode mode = ValidationMode::strict);

}  // namespace dsgd
