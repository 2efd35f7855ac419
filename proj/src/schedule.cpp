#include "dsgd/schedule.hpp"

#include <cmath>
#include <sstream>

namespace dsgd {
namespace {

// 3*delta1 and delta2 within this distance count as the boundary case.
constexpr double kBoundaryTol = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

Status pass_or_fail(bool passed) { return passed ? Status::ok : Status::fail; }

}  // namespace

double StepSchedule::alpha(std::uint64_t k) const {
  return a / std::pow(epsilon * static_cast<double>(k) + 1.0, delta2);
}

double StepSchedule::beta(std::uint64_t k) const {
  return b / std::pow(epsilon * static_cast<double>(k) + 1.0, delta1);
}

double StepSchedule::gamma(std::uint64_t k) const { return alpha(k) / beta(k); }

double StepSchedule::gamma_closed_form(std::uint64_t k) const {
  return (a / b) / std::pow(epsilon * static_cast<double>(k) + 1.0, delta2 - delta1);
}

ValidationReport validate_schedule(const StepSchedule& s, ValidationMode mode) {
  ValidationReport r;
  r.checks.push_back({"a > 0", pass_or_fail(s.a > 0.0), "a = " + fmt(s.a)});
  r.checks.push_back({"b > 0", pass_or_fail(s.b > 0.0), "b = " + fmt(s.b)});
  r.checks.push_back({"epsilon > 0", pass_or_fail(s.epsilon > 0.0), "epsilon = " + fmt(s.epsilon)});
  r.checks.push_back({"delta1 > 0", pass_or_fail(s.delta1 > 0.0), "delta1 = " + fmt(s.delta1)});
  r.checks.push_back({"delta2 > 0", pass_or_fail(s.delta2 > 0.0), "delta2 = " + fmt(s.delta2)});

  const double three_d1 = 3.0 * s.delta1;
  Status ratio = pass_or_fail(three_d1 < s.delta2 && std::abs(three_d1 - s.delta2) > kBoundaryTol);
  if (ratio == Status::fail && mode == ValidationMode::compat && std::abs(three_d1 - s.delta2) <= kBoundaryTol) {
    ratio = Status::warn;
  }
  r.checks.push_back({"3*delta1 < delta2", ratio, "3*delta1 = " + fmt(three_d1) + ", delta2 = " + fmt(s.delta2)});
  r.checks.push_back({"delta2 <= 1", pass_or_fail(s.delta2 <= 1.0), "delta2 = " + fmt(s.delta2)});
  r.checks.push_back(
      {"delta1 + delta2 > 1", pass_or_fail(s.delta1 + s.delta2 > 1.0), "sum = " + fmt(s.delta1 + s.delta2)});
  r.checks.push_back({"delta2 > 1/2", pass_or_fail(s.delta2 > 0.5), "delta2 = " + fmt(s.delta2)});
  r.checks.push_back({"delta2 > 2*delta1", pass_or_fail(s.delta2 > 2.0 * s.delta1),
                      "2*delta1 = " + fmt(2.0 * s.delta1) + ", delta2 = " + fmt(s.delta2), true});
  return r;
}

}  // namespace dsgd
