#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsgd {

/// Flat `key = value` settings. `[section]` headers prefix the keys that
/// follow (`[schedule]` then `a = 1` gives `schedule.a`). `#` starts
/// a comment. Each entry remembers the line it came from.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<config>");
  /// Reads either config text or the `config.<key>,<value>` rows of a summary.csv.
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  /// "line N" or "command line" for error messages.
  std::string where(std::string_view key) const;

  /// Applies `--key=value` arguments; returns the arguments it did not consume.
  std::vector<std::string> apply_overrides(const std::vector<std::string>& args);

  const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::map<std::string, std::string, std::less<>> origins_;
};

}  // namespace dsgd
