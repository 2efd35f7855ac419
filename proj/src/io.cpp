#include "dsgd/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dsgd/errors.hpp"

namespace dsgd {
namespace {

void put_le64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 8);
}

std::uint64_t get_le64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("checkpoint: truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::optional<double> parse_optional(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw FormatError("metrics: bad number '" + std::string(cell) + "'");
  }
  return v;
}

void put_optional(std::ostream& out, const std::optional<double>& v) {
  out << ',';
  if (v) out << format_double(*v);
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const double> w) {
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  put_le64(out, w.size());
  for (double v : w) put_le64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw FormatError("checkpoint: write failed");
}

std::vector<double> read_checkpoint(std::istream& in) {
  char magic[sizeof kCheckpointMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto n = get_le64(in);
  std::vector<double> w;
  w.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) w.push_back(std::bit_cast<double>(get_le64(in)));
  return w;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const double> w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_checkpoint(out, w);
}

std::vector<double> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_checkpoint(in);
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_metrics_header(std::ostream& out) { out << kMetricsHeader << '\n'; }

void write_metrics_row(std::ostream& out, const MetricsRecord& r) {
  out << r.k << ',' << format_double(r.alpha) << ',' << format_double(r.beta);
  put_optional(out, r.risk);
  put_optional(out, r.consensus_error);
  put_optional(out, r.avg_grad_norm_sq);
  put_optional(out, r.lyapunov);
  put_optional(out, r.step_norm_sq);
  out << '\n';
}

std::vector<MetricsRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("metrics: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw FormatError("metrics: unexpected header '" + line + "'");
  std::vector<MetricsRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cells.size() != 8) throw FormatError("metrics: line " + std::to_string(line_no) + " has wrong column count");
    MetricsRecord r;
    const auto k = parse_optional(cells[0]);
    if (!k) throw FormatError("metrics: missing k on line " + std::to_string(line_no));
    r.k = static_cast<std::uint64_t>(*k);
    r.alpha = parse_optional(cells[1]).value_or(0.0);
    r.beta = parse_optional(cells[2]).value_or(0.0);
    r.risk = parse_optional(cells[3]);
    r.consensus_error = parse_optional(cells[4]);
    r.avg_grad_norm_sq = parse_optional(cells[5]);
    r.lyapunov = parse_optional(cells[6]);
    r.step_norm_sq = parse_optional(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dsgd
