#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace dsgd {

inline constexpr std::size_t kClassCount = 10;

/// Labeled image samples; features are stored row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t d_in, std::vector<double> features, std::vector<std::uint8_t> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t input_dim() const noexcept { return d_in_; }

  std::span<const double> features(std::size_t i) const { return {features_.data() + i * d_in_, d_in_}; }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }
  /// One-hot target of sample i.
  std::vector<double> target(std::size_t i) const;

  /// Samples at `indices`, in that order.
  Dataset select(std::span<const std::size_t> indices) const;

  /// FNV-1a over dimensions, features and labels; identifies a test set.
  std::uint64_t content_hash() const;

 private:
  std::size_t d_in_ = 0;
  std::vector<double> features_;
  std::vector<std::uint8_t> labels_;
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are divided by 255.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
Dataset read_idx(std::istream& images, std::istream& labels);
/// Serializes pixel bytes and labels as an IDX pair.
void write_idx(std::ostream& images, std::ostream& labels, std::span<const std::uint8_t> pixels,
               std::span<const std::uint8_t> label_bytes, std::uint32_t rows, std::uint32_t cols);

/// Comma-separated features (d_in per row) and one integer label per row.
Dataset load_matrix_csv(const std::filesystem::path& features, const std::filesystem::path& labels,
                        std::size_t d_in, bool skip_header = false);
Dataset read_matrix_csv(std::istream& features, std::istream& labels, std::size_t d_in, bool skip_header = false);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Seeded shuffle, then the first n_train samples train and the rest test.
TrainTestSplit split_train_test(const Dataset& d, std::size_t n_train, std::uint64_t seed);

/// Seeded selection of `count` samples.
Dataset take_random_subset(const Dataset& d, std::size_t count, std::uint64_t seed);

/// Disjoint assignment of training-set indices to agents.
struct Partition {
  std::vector<std::vector<std::size_t>> assignment;

  std::size_t agent_count() const noexcept { return assignment.size(); }
  std::vector<std::size_t> counts() const;
  std::size_t total() const;
};

/// Seeded shuffle dealt into near-equal blocks; the first (size mod n)
/// agents get one extra sample.
Partition partition_random_equal(std::size_t train_size, std::size_t n, std::uint64_t seed);
/// Agent i receives every sample with label i. Requires n == 10 and every class present.
Partition partition_by_class(const Dataset& train, std::size_t n);

/// `agent,sample_index` rows with a header line.
void write_partition_csv(std::ostream& out, const Partition& p);

}  // namespace dsgd
