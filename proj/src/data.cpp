#include "dsgd/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "dsgd/errors.hpp"
#include "dsgd/oracle.hpp"

namespace dsgd {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError(std::string("idx: truncated header in ") + what);
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                              static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 engine(mix_seed(seed));
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = engine() % i;
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset::Dataset(std::size_t d_in, std::vector<double> features, std::vector<std::uint8_t> labels)
    : d_in_(d_in), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != d_in_ * labels_.size()) throw InvalidArgument("dataset: feature/label count mismatch");
  for (auto l : labels_)
    if (l >= kClassCount) throw InvalidArgument("dataset: label out of range");
}

std::vector<double> Dataset::target(std::size_t i) const {
  std::vector<double> t(kClassCount, 0.0);
  t[labels_.at(i)] = 1.0;
  return t;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  std::vector<double> f;
  f.reserve(indices.size() * d_in_);
  std::vector<std::uint8_t> l;
  l.reserve(indices.size());
  for (auto i : indices) {
    if (i >= size()) throw InvalidArgument("dataset: index out of range");
    const auto x = features(i);
    f.insert(f.end(), x.begin(), x.end());
    l.push_back(labels_[i]);
  }
  return Dataset(d_in_, std::move(f), std::move(l));
}

std::uint64_t Dataset::content_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t dims[2] = {d_in_, labels_.size()};
  mix(dims, sizeof dims);
  mix(features_.data(), features_.size() * sizeof(double));
  mix(labels_.data(), labels_.size());
  return h;
}

Dataset read_idx(std::istream& images, std::istream& labels) {
  if (read_be32(images, "images") != kImageMagic) throw FormatError("idx: bad magic in images file");
  const auto count = read_be32(images, "images");
  const auto rows = read_be32(images, "images");
  const auto cols = read_be32(images, "images");
  if (read_be32(labels, "labels") != kLabelMagic) throw FormatError("idx: bad magic in labels file");
  const auto label_count = read_be32(labels, "labels");
  if (count != label_count) {
    throw FormatError("idx: count mismatch (" + std::to_string(count) + " images, " + std::to_string(label_count) +
                      " labels)");
  }
  const std::size_t d_in = std::size_t{rows} * cols;
  std::vector<unsigned char> pixels(std::size_t{count} * d_in);
  if (!images.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()))) {
    throw FormatError("idx: truncated image payload");
  }
  std::vector<std::uint8_t> y(count);
  if (!labels.read(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(y.size()))) {
    throw FormatError("idx: truncated label payload");
  }
  for (auto l : y)
    if (l >= kClassCount) throw FormatError("idx: label out of range");
  std::vector<double> x(pixels.size());
  std::transform(pixels.begin(), pixels.end(), x.begin(), [](unsigned char p) { return p / 255.0; });
  return Dataset(d_in, std::move(x), std::move(y));
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto img = open_input(images);
  auto lab = open_input(labels);
  return read_idx(img, lab);
}

void write_idx(std::ostream& images, std::ostream& labels, std::span<const std::uint8_t> pixels,
               std::span<const std::uint8_t> label_bytes, std::uint32_t rows, std::uint32_t cols) {
  const std::size_t d = std::size_t{rows} * cols;
  if (d == 0 || pixels.size() != d * label_bytes.size()) throw InvalidArgument("write_idx: shape mismatch");
  write_be32(images, kImageMagic);
  write_be32(images, static_cast<std::uint32_t>(label_bytes.size()));
  write_be32(images, rows);
  write_be32(images, cols);
  images.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  write_be32(labels, kLabelMagic);
  write_be32(labels, static_cast<std::uint32_t>(label_bytes.size()));
  labels.write(reinterpret_cast<const char*>(label_bytes.data()), static_cast<std::streamsize>(label_bytes.size()));
}

Dataset read_matrix_csv(std::istream& features, std::istream& labels, std::size_t d_in, bool skip_header) {
  if (d_in == 0) throw InvalidArgument("csv: d_in must be positive");
  std::vector<double> x;
  std::vector<std::uint8_t> y;
  std::string line;
  std::size_t line_no = 0;
  if (skip_header) {
    std::getline(features, line);
    std::getline(labels, line);
    ++line_no;
  }
  while (std::getline(features, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    std::size_t cols = 0;
    while (true) {
      const auto comma = rest.find(',');
      const auto cell = trim(rest.substr(0, comma));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw FormatError("csv: non-numeric cell '" + std::string(cell) + "' on line " + std::to_string(line_no));
      }
      x.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cols != d_in) {
      throw FormatError("csv: line " + std::to_string(line_no) + " has " + std::to_string(cols) + " columns, expected " +
                        std::to_string(d_in));
    }
  }
  line_no = skip_header ? 1 : 0;
  while (std::getline(labels, line)) {
    ++line_no;
    const auto cell = trim(line);
    if (cell.empty()) continue;
    int v = -1;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
      throw FormatError("csv: non-numeric label on line " + std::to_string(line_no));
    }
    if (v < 0 || v >= static_cast<int>(kClassCount)) {
      throw FormatError("csv: label " + std::string(cell) + " out of range on line " + std::to_string(line_no));
    }
    y.push_back(static_cast<std::uint8_t>(v));
  }
  if (y.empty()) throw FormatError("csv: no samples");
  if (x.size() != y.size() * d_in) {
    throw FormatError("csv: " + std::to_string(x.size() / d_in) + " feature rows but " + std::to_string(y.size()) +
                      " labels");
  }
  return Dataset(d_in, std::move(x), std::move(y));
}

Dataset load_matrix_csv(const std::filesystem::path& features, const std::filesystem::path& labels, std::size_t d_in,
                        bool skip_header) {
  auto f = open_input(features);
  auto l = open_input(labels);
  return read_matrix_csv(f, l, d_in, skip_header);
}

TrainTestSplit split_train_test(const Dataset& d, std::size_t n_train, std::uint64_t seed) {
  if (n_train > d.size()) throw InvalidArgument("split: n_train exceeds dataset size");
  const auto idx = shuffled_indices(d.size(), seed);
  const std::span<const std::size_t> all(idx);
  return {d.select(all.first(n_train)), d.select(all.subspan(n_train))};
}

Dataset take_random_subset(const Dataset& d, std::size_t count, std::uint64_t seed) {
  if (count > d.size()) throw InvalidArgument("subset: count exceeds dataset size");
  const auto idx = shuffled_indices(d.size(), seed);
  return d.select(std::span<const std::size_t>(idx).first(count));
}

std::vector<std::size_t> Partition::counts() const {
  std::vector<std::size_t> c;
  for (const auto& a : assignment) c.push_back(a.size());
  return c;
}

std::size_t Partition::total() const {
  std::size_t t = 0;
  for (const auto& a : assignment) t += a.size();
  return t;
}

Partition partition_random_equal(std::size_t train_size, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("partition: zero agents");
  if (n > train_size) throw InvalidArgument("partition: more agents than training samples");
  const auto idx = shuffled_indices(train_size, seed);
  Partition p;
  p.assignment.resize(n);
  const std::size_t base = train_size / n;
  const std::size_t extra = train_size % n;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = base + (i < extra ? 1 : 0);
    p.assignment[i].assign(idx.begin() + static_cast<std::ptrdiff_t>(cursor),
                           idx.begin() + static_cast<std::ptrdiff_t>(cursor + m));
    std::sort(p.assignment[i].begin(), p.assignment[i].end());
    cursor += m;
  }
  return p;
}

Partition partition_by_class(const Dataset& train, std::size_t n) {
  if (n != kClassCount) {
    throw InvalidArgument("partition by class needs " + std::to_string(kClassCount) + " agents, got " +
                          std::to_string(n));
  }
  Partition p;
  p.assignment.resize(n);
  for (std::size_t s = 0; s < train.size(); ++s) p.assignment[train.label(s)].push_back(s);
  for (std::size_t c = 0; c < n; ++c)
    if (p.assignment[c].empty()) throw InvalidArgument("partition by class: class " + std::to_string(c) + " missing");
  return p;
}

void write_partition_csv(std::ostream& out, const Partition& p) {
  out << "agent,sample_index\n";
  for (std::size_t i = 0; i < p.agent_count(); ++i)
    for (auto s : p.assignment[i]) out << i << ',' << s << '\n';
}

}  // namespace dsgd
