#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dsgd/engine.hpp"

namespace dsgd {

inline constexpr char kCheckpointMagic[8] = {'C', 'S', 'G', 'D', 'W', '0', '0', '1'};

/// 8-byte magic, dimension as little-endian u64, then little-endian doubles.
void write_checkpoint(std::ostream& out, std::span<const double> w);
std::vector<double> read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, std::span<const double> w);
std::vector<double> load_checkpoint(const std::filesystem::path& path);

inline constexpr const char* kMetricsHeader =
    "k,alpha,beta,risk,consensus_error,avg_grad_norm_sq,lyapunov,step_norm_sq";

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRecord& r);
std::vector<MetricsRecord> read_metrics_csv(std::istream& in);

}  // namespace dsgd
