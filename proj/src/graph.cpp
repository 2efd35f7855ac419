#include "dsgd/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <queue>
#include <sstream>

#include "dsgd/errors.hpp"

namespace dsgd {
namespace {

constexpr double kZeroEigenvalueTol = 1e-9;

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("topology: bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

TopologySpec TopologySpec::parse(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw FormatError("topology: expected kind:args, got '" + std::string(text) + "'");
  }
  const auto kind = trim(text.substr(0, colon));
  const auto args = trim(text.substr(colon + 1));
  if (kind == "ring") return ring(parse_count(args, "agent count"));
  if (kind == "complete") return complete(parse_count(args, "agent count"));
  if (kind == "path") return path(parse_count(args, "agent count"));
  if (kind != "edges") throw FormatError("topology: unknown kind '" + std::string(kind) + "'");

  // edges:n=4;0-1,1-2
  const auto semi = args.find(';');
  const auto head = trim(args.substr(0, semi));
  if (!head.starts_with("n=")) throw FormatError("topology: edge list must start with n=<count>");
  const std::size_t n = parse_count(trim(head.substr(2)), "agent count");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (semi != std::string_view::npos) {
    std::string_view rest = args.substr(semi + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (item.empty()) continue;
      const auto dash = item.find('-');
      if (dash == std::string_view::npos) throw FormatError("topology: bad edge '" + std::string(item) + "'");
      edges.emplace_back(parse_count(trim(item.substr(0, dash)), "node"),
                         parse_count(trim(item.substr(dash + 1)), "node"));
    }
  }
  return edge_list(n, std::move(edges));
}

std::string TopologySpec::to_string() const {
  switch (kind) {
    case Kind::ring: return "ring:" + std::to_string(n);
    case Kind::complete: return "complete:" + std::to_string(n);
    case Kind::path: return "path:" + std::to_string(n);
    case Kind::edges: {
      std::ostringstream os;
      os << "edges:n=" << n << ';';
      for (std::size_t e = 0; e < edges.size(); ++e) {
        os << (e ? "," : "") << edges[e].first << '-' << edges[e].second;
      }
      return os.str();
    }
  }
  return {};
}

Graph::Graph(const TopologySpec& spec) : spec_(spec), n_(spec.n) {
  if (n_ == 0) throw InvalidArgument("graph: empty node set");
  adjacency_.assign(n_ * n_, 0);
  auto connect = [&](std::size_t i, std::size_t j) {
    if (i >= n_ || j >= n_) throw InvalidArgument("graph: edge endpoint out of range");
    if (i == j) throw InvalidArgument("graph: self-loop at node " + std::to_string(i));
    adjacency_[i * n_ + j] = 1;
    adjacency_[j * n_ + i] = 1;
  };

  switch (spec.kind) {
    case TopologySpec::Kind::ring:
      if (n_ == 2) connect(0, 1);
      if (n_ > 2)
        for (std::size_t i = 0; i < n_; ++i) connect(i, (i + 1) % n_);
      break;
    case TopologySpec::Kind::complete:
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) connect(i, j);
      break;
    case TopologySpec::Kind::path:
      for (std::size_t i = 0; i + 1 < n_; ++i) connect(i, i + 1);
      break;
    case TopologySpec::Kind::edges:
      for (auto [i, j] : spec.edges) connect(i, j);
      break;
  }

  laplacian_.assign(n_ * n_, 0);
  neighbors_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    int deg = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (adjacency_[i * n_ + j] == 0) continue;
      ++deg;
      laplacian_[i * n_ + j] = -1;
      neighbors_[i].push_back(j);
      if (i < j) edges_.emplace_back(i, j);
    }
    laplacian_[i * n_ + i] = deg;
  }

  Eigen::MatrixXd lap(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) lap(i, j) = laplacian_[i * n_ + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  eigenvalues_.assign(ev.data(), ev.data() + ev.size());
  // Symmetric PSD: singular values are the eigenvalues.
  sigma_max_ = std::max(0.0, eigenvalues_.back());
  if (n_ >= 2) {
    const double tol = kZeroEigenvalueTol * std::max(1.0, sigma_max_);
    lambda2_ = eigenvalues_[1] > tol ? eigenvalues_[1] : 0.0;
  }
}

std::vector<double> Graph::dense_laplacian() const {
  return {laplacian_.begin(), laplacian_.end()};
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.size();
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const auto i = frontier.front();
    frontier.pop();
    for (auto j : g.neighbors(i)) {
      if (!seen[j]) {
        seen[j] = 1;
        ++reached;
        frontier.push(j);
      }
    }
  }
  return reached == n;
}

ValidationReport validate_mixing(const Graph& g, double b, ValidationMode mode) {
  if (!is_connected(g)) throw InvalidArgument("validate_mixing: graph is disconnected");
  if (!(b > 0.0)) throw InvalidArgument("validate_mixing: b must be positive");
  ValidationReport report;
  const double product = b * g.sigma_max();
  std::ostringstream detail;
  detail << "b = " << b << ", sigma_max = " << g.sigma_max() << ", b*sigma_max = " << product;
  if (g.sigma_max() > 0.0) detail << ", bound 1/sigma_max = " << 1.0 / g.sigma_max();
  Status st = Status::ok;
  if (!(product < 1.0)) st = mode == ValidationMode::strict ? Status::fail : Status::warn;
  report.checks.push_back({"b * sigma_max(L) < 1", st, detail.str()});
  return report;
}

std::vector<double> mixing_matrix(const Graph& g, double beta) {
  if (beta < 0.0) throw InvalidArgument("mixing_matrix: beta must be nonnegative");
  const std::size_t n = g.size();
  std::vector<double> w(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w[i * n + j] = (i == j ? 1.0 : 0.0) - beta * g.laplacian(i, j);
  return w;
}

double laplacian_quadratic_form(const Graph& g, std::span<const double> stacked, std::size_t dim) {
  if (stacked.size() != g.size() * dim) throw InvalidArgument("laplacian_quadratic_form: length mismatch");
  double total = 0.0;
  for (auto [i, j] : g.edges()) {
    const double* wi = stacked.data() + i * dim;
    const double* wj = stacked.data() + j * dim;
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = wi[c] - wj[c];
      total += d * d;
    }
  }
  return total;
}

void apply_laplacian(const Graph& g, std::span<const double> stacked, std::size_t dim, std::span<double> out) {
  if (stacked.size() != g.size() * dim || out.size() != stacked.size()) {
    throw InvalidArgument("apply_laplacian: length mismatch");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double* wi = stacked.data() + i * dim;
    double* oi = out.data() + i * dim;
    std::fill(oi, oi + dim, 0.0);
    for (auto j : g.neighbors(i)) {
      const double* wj = stacked.data() + j * dim;
      for (std::size_t c = 0; c < dim; ++c) oi[c] += wi[c] - wj[c];
    }
  }
}

}  // namespace dsgd
