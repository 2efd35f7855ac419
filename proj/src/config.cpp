#include "dsgd/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dsgd/errors.hpp"

namespace dsgd {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Config Config::parse(std::string_view text, std::string_view origin) {
  Config c;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + " line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw FormatError(where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError(where + ": empty key");
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    c.values_[full] = std::string(trim(line.substr(eq + 1)));
    c.origins_[full] = where;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() != ".csv") return parse(text, path.string());

  // summary.csv: key,value rows; only config.* rows matter.
  Config c;
  std::istringstream rows(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(rows, line)) {
    ++line_no;
    if (!line.starts_with("config.")) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError(path.string() + " line " + std::to_string(line_no) + ": no value");
    std::string key = line.substr(7, comma - 7);
    std::string value = std::string(trim(std::string_view(line).substr(comma + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    c.origins_[key] = path.string() + " line " + std::to_string(line_no);
    c.values_[std::move(key)] = std::move(value);
  }
  if (c.values_.empty()) throw FormatError(path.string() + ": no config rows");
  return c;
}

void Config::set(std::string key, std::string value) {
  origins_[key] = "command line";
  values_[std::move(key)] = std::move(value);
}

bool Config::contains(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> Config::get(std::string_view key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return std::nullopt;
}

std::string Config::where(std::string_view key) const {
  if (auto it = origins_.find(key); it != origins_.end()) return it->second;
  return "default";
}

std::vector<std::string> Config::apply_overrides(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (!a.starts_with("--") || eq == std::string::npos || eq == 2) {
      rest.push_back(a);
      continue;
    }
    set(a.substr(2, eq - 2), a.substr(eq + 1));
  }
  return rest;
}

}  // namespace dsgd
