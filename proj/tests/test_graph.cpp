#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dsgd/errors.hpp"
#include "dsgd/graph.hpp"
#include "test_support.hpp"

using namespace dsgd;
using dsgd::testing::dense_laplacian;
using dsgd::testing::general_eigenvalues;

TEST(Graph, RingOfTenHasDegreeTwo) {
  const Graph g(TopologySpec::ring(10));
  for (std::size_t i = 0; i < 10; ++i) {
    int row = 0;
    for (std::size_t j = 0; j < 10; ++j) row += g.adjacency(i, j);
    EXPECT_EQ(row, 2);
    EXPECT_EQ(g.laplacian(i, i), 2);
  }
  EXPECT_EQ(g.edges().size(), 10u);
}

TEST(Graph, CompleteTwoSpectrum) {
  const Graph g(TopologySpec::complete(2));
  EXPECT_EQ(g.laplacian(0, 0), 1);
  EXPECT_EQ(g.laplacian(0, 1), -1);
  EXPECT_EQ(g.laplacian(1, 0), -1);
  EXPECT_EQ(g.laplacian(1, 1), 1);
  EXPECT_NEAR(g.lambda2(), 2.0, 1e-12);
  EXPECT_NEAR(g.sigma_max(), 2.0, 1e-12);
}

TEST(Graph, RingOfTenSpectrumMatchesOracle) {
  const Graph g(TopologySpec::ring(10));
  const auto oracle = general_eigenvalues(dense_laplacian(g));
  // Cycle Laplacian eigenvalues are 2 - 2cos(2 pi k / n).
  EXPECT_NEAR(g.lambda2(), 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / 10.0), 1e-9);
  EXPECT_NEAR(g.lambda2(), oracle[1], 1e-9);
  EXPECT_NEAR(g.sigma_max(), 4.0, 1e-9);
  EXPECT_NEAR(g.sigma_max(), oracle.back(), 1e-9);
}

TEST(Graph, ParsesTopologyText) {
  EXPECT_EQ(TopologySpec::parse("ring:10").n, 10u);
  EXPECT_EQ(TopologySpec::parse("complete:5").kind, TopologySpec::Kind::complete);
  EXPECT_EQ(TopologySpec::parse("path:4").kind, TopologySpec::Kind::path);
  const auto e = TopologySpec::parse("edges:n=4;0-1,1-2,2-3");
  EXPECT_EQ(e.n, 4u);
  ASSERT_EQ(e.edges.size(), 3u);
  EXPECT_EQ(e.edges[2], (std::pair<std::size_t, std::size_t>{2, 3}));
  EXPECT_EQ(TopologySpec::parse(e.to_string()).edges, e.edges);
  EXPECT_THROW(TopologySpec::parse("star:4"), FormatError);
  EXPECT_THROW(TopologySpec::parse("ring"), FormatError);
  EXPECT_THROW(TopologySpec::parse("edges:4;0-1"), FormatError);
}

TEST(Graph, RejectsEmptyGraphAndSelfLoops) {
  EXPECT_THROW(Graph(TopologySpec::ring(0)), InvalidArgument);
  EXPECT_THROW(Graph(TopologySpec::edge_list(3, {{1, 1}})), InvalidArgument);
  EXPECT_THROW(Graph(TopologySpec::edge_list(3, {{0, 3}})), InvalidArgument);
}

TEST(Graph, DuplicateEdgesAreIdempotent) {
  const Graph g(TopologySpec::edge_list(3, {{0, 1}, {1, 0}, {0, 1}, {1, 2}}));
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(g.degree(1), 2);
  EXPECT_EQ(g.degree(0), 1);
}

TEST(Graph, Connectivity) {
  EXPECT_TRUE(is_connected(Graph(TopologySpec::ring(10))));
  EXPECT_TRUE(is_connected(Graph(TopologySpec::path(3))));
  EXPECT_FALSE(is_connected(Graph(TopologySpec::edge_list(4, {{0, 1}, {2, 3}}))));
  EXPECT_TRUE(is_connected(Graph(TopologySpec::ring(1))));
}

TEST(Graph, ConnectivityAgreesWithSpectralGapOnRandomGraphs) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  std::uniform_real_distribution<double> density(0.05, 0.6);
  int connected = 0;
  for (int t = 0; t < 100; ++t) {
    const Graph g(dsgd::testing::random_topology(rng, size(rng), density(rng)));
    EXPECT_EQ(is_connected(g), g.lambda2() > 1e-9) << g.spec().to_string();
    connected += is_connected(g);
  }
  // Both branches must be exercised.
  EXPECT_GT(connected, 5);
  EXPECT_LT(connected, 95);
}

TEST(Graph, LaplacianInvariants) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const Graph g(dsgd::testing::random_topology(rng, 2 + t % 11, 0.4));
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
      int row = 0;
      for (std::size_t j = 0; j < n; ++j) {
        row += g.laplacian(i, j);
        EXPECT_EQ(g.adjacency(i, j), g.adjacency(j, i));
        EXPECT_TRUE(g.adjacency(i, j) == 0 || g.adjacency(i, j) == 1);
      }
      EXPECT_EQ(g.adjacency(i, i), 0);
      EXPECT_EQ(row, 0);  // exact: integer Laplacian
    }
    EXPECT_GE(g.eigenvalues().front(), -1e-9);
    EXPECT_NEAR(g.sigma_max(), g.eigenvalues().back(), 0.0);
  }
}

TEST(Graph, QuadraticFormBoundedBySpectralGap) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const Graph g(dsgd::testing::random_topology(rng, 2 + t % 9, 0.5));
    if (!is_connected(g)) continue;
    const auto x = dsgd::testing::random_vector(rng, g.size());
    double mean = 0.0;
    for (double v : x) mean += v / static_cast<double>(x.size());
    double dev = 0.0;
    for (double v : x) dev += (v - mean) * (v - mean);
    const double form = laplacian_quadratic_form(g, x, 1);
    EXPECT_GE(form, g.lambda2() * dev * (1.0 - 1e-10));
  }
}

TEST(Mixing, ValidationAgainstSpectralBound) {
  const Graph ring(TopologySpec::ring(10));
  EXPECT_TRUE(validate_mixing(ring, 0.2).ok());
  const auto strict = validate_mixing(ring, 0.2525, ValidationMode::strict);
  EXPECT_EQ(strict.status(), Status::fail);
  EXPECT_NE(strict.checks.front().detail.find("1.01"), std::string::npos);
  EXPECT_EQ(validate_mixing(ring, 0.2525, ValidationMode::compat).status(), Status::warn);
  EXPECT_TRUE(validate_mixing(Graph(TopologySpec::complete(2)), 0.49).ok());
  EXPECT_THROW(validate_mixing(Graph(TopologySpec::edge_list(4, {{0, 1}, {2, 3}})), 0.1), InvalidArgument);
}

TEST(Mixing, MatrixExamples) {
  const Graph g2(TopologySpec::complete(2));
  const auto w = mixing_matrix(g2, 0.25);
  EXPECT_DOUBLE_EQ(w[0], 0.75);
  EXPECT_DOUBLE_EQ(w[1], 0.25);
  EXPECT_DOUBLE_EQ(w[2], 0.25);
  EXPECT_DOUBLE_EQ(w[3], 0.75);
  const Graph ring(TopologySpec::ring(10));
  const auto id = mixing_matrix(ring, 0.0);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(id[i * 10 + j], i == j ? 1.0 : 0.0);
}

TEST(Mixing, DoublyStochasticAndSpectrumInsideUnitInterval) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> frac(0.01, 0.99);
  for (int t = 0; t < 100; ++t) {
    const Graph g(dsgd::testing::random_topology(rng, 2 + t % 19, 0.3));
    const std::size_t n = g.size();
    if (!is_connected(g)) continue;
    const double b = frac(rng) / g.sigma_max();
    ASSERT_TRUE(validate_mixing(g, b).ok());
    const auto w = mixing_matrix(g, b);
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row += w[i * n + j];
        col += w[j * n + i];
        m(i, j) = w[i * n + j];
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
      EXPECT_NEAR(col, 1.0, 1e-12);
    }
    const auto ev = general_eigenvalues(m);
    EXPECT_GT(ev.front(), -1.0);
    EXPECT_NEAR(ev.back(), 1.0, 1e-9);
    EXPECT_LT(ev[n - 2], 1.0 - 1e-9);  // simple eigenvalue at 1
  }
}

TEST(Mixing, RingOfTenEigenvalues) {
  const Graph ring(TopologySpec::ring(10));
  const auto w = mixing_matrix(ring, 0.2);
  const auto ev = general_eigenvalues(Eigen::Map<const Eigen::Matrix<double, 10, 10, Eigen::RowMajor>>(w.data()));
  EXPECT_NEAR(ev.front(), 0.2, 1e-9);  // 1 - 0.2 * 4
  EXPECT_NEAR(ev.back(), 1.0, 1e-12);
  EXPECT_LT(ev[8], 1.0 - 1e-3);
}

TEST(Mixing, ApplyLaplacianMatchesDense) {
  std::mt19937_64 rng(5);
  const Graph g(TopologySpec::edge_list(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 3}}));
  const auto x = dsgd::testing::random_vector(rng, 5 * 3);
  std::vector<double> out(x.size());
  apply_laplacian(g, x, 3, out);
  const Eigen::VectorXd ref = dsgd::testing::kron_identity(dense_laplacian(g), 3) * dsgd::testing::as_vector(x);
  for (std::size_t c = 0; c < x.size(); ++c) EXPECT_NEAR(out[c], ref(static_cast<Eigen::Index>(c)), 1e-12);
  EXPECT_NEAR(laplacian_quadratic_form(g, x, 3), dsgd::testing::as_vector(x).dot(ref), 1e-10);
}
