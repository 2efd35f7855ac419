#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dsgd {

/// strict rejects every violated condition; compat demotes the known
/// boundary cases (used by published experiment settings) to warnings.
enum class ValidationMode { strict, compat };

enum class Status { ok, warn, fail };

struct Check {
  std::string name;    // e.g. "3*delta1 < delta2"
  Status status;
  std::string detail;  // evaluated values
  bool informational = false;  // reported, never affects the overall status
};

struct ValidationReport {
  std::vector<Check> checks;

  Status status() const;
  bool ok() const { return status() == Status::ok; }
  bool accepted() const { return status() != Status::fail; }

  /// Names of non-informational checks that did not pass.
  std::vector<std::string> failures() const;
  std::string to_string() const;
};

ValidationMode parse_validation_mode(std::string_view text);
std::string_view to_string(ValidationMode mode);
std::string_view to_string(Status status);

}  // namespace dsgd
