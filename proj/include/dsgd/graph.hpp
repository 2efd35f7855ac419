#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dsgd/validation.hpp"

namespace dsgd {

/// Undirected, unweighted communication topology.
struct TopologySpec {
  enum class Kind { ring, complete, path, edges };
  Kind kind = Kind::ring;
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // Kind::edges only

  static TopologySpec ring(std::size_t n) { return {Kind::ring, n, {}}; }
  static TopologySpec complete(std::size_t n) { return {Kind::complete, n, {}}; }
  static TopologySpec path(std::size_t n) { return {Kind::path, n, {}}; }
  static TopologySpec edge_list(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> e) {
    return {Kind::edges, n, std::move(e)};
  }

  /// Parses `ring:10`, `complete:5`, `path:4` or `edges:n=4;0-1,1-2,2-3`.
  static TopologySpec parse(std::string_view text);
  std::string to_string() const;
};

/// Immutable graph with its Laplacian L = D - A and cached spectrum.
///
/// The Laplacian has exact integer entries. lambda2 is the second smallest
/// Laplacian eigenvalue, snapped to 0 when below 1e-9 * sigma_max, so it is
/// positive exactly when the graph is connected (n >= 2). For n = 1 it is 0.
class Graph {
 public:
  explicit Graph(const TopologySpec& spec);

  std::size_t size() const noexcept { return n_; }
  int adjacency(std::size_t i, std::size_t j) const { return adjacency_[i * n_ + j]; }
  int laplacian(std::size_t i, std::size_t j) const { return laplacian_[i * n_ + j]; }
  int degree(std::size_t i) const { return laplacian_[i * n_ + i]; }
  std::span<const std::size_t> neighbors(std::size_t i) const { return neighbors_[i]; }
  /// Each undirected edge once, with first < second.
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }

  /// Ascending Laplacian eigenvalues.
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  double lambda2() const noexcept { return lambda2_; }
  double sigma_max() const noexcept { return sigma_max_; }
  const TopologySpec& spec() const noexcept { return spec_; }

  /// Row-major dense Laplacian as doubles.
  std::vector<double> dense_laplacian() const;

 private:
  TopologySpec spec_;
  std::size_t n_;
  std::vector<int> adjacency_;
  std::vector<int> laplacian_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<double> eigenvalues_;
  double lambda2_ = 0.0;
  double sigma_max_ = 0.0;
};

/// Breadth-first reachability from node 0.
bool is_connected(const Graph& g);

/// Checks b * sigma_max(L) < 1. A violation fails in strict mode and warns
/// in compat mode. Throws InvalidArgument for a disconnected graph.
ValidationReport validate_mixing(const Graph& g, double b, ValidationMode mode = ValidationMode::strict);

/// W = I - beta * L, row-major n x n.
std::vector<double> mixing_matrix(const Graph& g, double beta);

/// x^T (L (x) I_dim) x, evaluated as the sum over edges of ||x_i - x_j||^2.
double laplacian_quadratic_form(const Graph& g, std::span<const double> stacked, std::size_t dim);

/// out = (L (x) I_dim) x, evaluated blockwise from neighbor lists.
void apply_laplacian(const Graph& g, std::span<const double> stacked, std::size_t dim,
                     std::span<double> out);

}  // namespace dsgd
