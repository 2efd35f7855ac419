#include "dsgd/validation.hpp"

#include <algorithm>
#include <sstream>

#include "dsgd/errors.hpp"

namespace dsgd {

Status ValidationReport::status() const {
  Status worst = Status::ok;
  for (const auto& c : checks) {
    if (c.informational) continue;
    if (c.status == Status::fail) return Status::fail;
    if (c.status == Status::warn) worst = Status::warn;
  }
  return worst;
}

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.informational && c.status != Status::ok) out.push_back(c.name);
  }
  return out;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.informational ? "info" : dsgd::to_string(c.status)) << ": " << c.name;
    if (c.informational) os << " [" << dsgd::to_string(c.status) << "]";
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

ValidationMode parse_validation_mode(std::string_view text) {
  if (text == "strict") return ValidationMode::strict;
  if (text == "compat") return ValidationMode::compat;
  throw InvalidArgument("validation mode must be strict or compat, got '" + std::string(text) + "'");
}

std::string_view to_string(ValidationMode mode) { return mode == ValidationMode::strict ? "strict" : "compat"; }

std::string_view to_string(Status status) {
  switch (status) {
    case Status::ok: return "ok";
    case Status::warn: return "warn";
    case Status::fail: return "fail";
  }
  return "?";
}

}  // namespace dsgd
