#include "mjcons/graphs.hpp"

#include "mjcons/rng.hpp"

#include <gtest/gtest.h>

using namespace mjcons;
using Eigen::MatrixXd;

namespace {

graphs::Digraph ring4() {
  MatrixXd a = MatrixXd::Zero(4, 4);  // 1 -> 2 -> 3 -> 4 -> 1
  a(1, 0) = 1;
  a(2, 1) = 1;
  a(3, 2) = 1;
  a(0, 3) = 1;
  return graphs::Digraph(a);
}

// Balanced connected digraph: a sum of randomly weighted Hamiltonian cycles.
graphs::Digraph random_balanced(int n, rng::Stream& stream) {
  MatrixXd a = MatrixXd::Zero(n, n);
  for (int cycle = 0; cycle < 3; ++cycle) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(stream.raw() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    const double w = stream.uniform(0.1, 2.0);
    for (int i = 0; i < n; ++i) {
      const int from = perm[static_cast<std::size_t>(i)];
      const int to = perm[static_cast<std::size_t>((i + 1) % n)];
      a(to, from) += w;
    }
  }
  return graphs::Digraph(a);
}

}  // namespace

TEST(Laplacian, SingleEdge) {
  MatrixXd a(2, 2);
  a << 0, 1, 0, 0;
  MatrixXd expected(2, 2);
  expected << 1, -1, 0, 0;
  EXPECT_TRUE(graphs::laplacian(graphs::Digraph(a)).isApprox(expected, 0.0));
}

TEST(Laplacian, EmptyGraph) {
  EXPECT_TRUE(graphs::laplacian(graphs::Digraph(MatrixXd::Zero(3, 3))).isZero(0.0));
}

TEST(Laplacian, DirectedRingIsCirculant) {
  const MatrixXd l = graphs::laplacian(ring4());
  MatrixXd expected(4, 4);
  expected << 1, 0, 0, -1,
      -1, 1, 0, 0,
      0, -1, 1, 0,
      0, 0, -1, 1;
  EXPECT_TRUE(l.isApprox(expected, 0.0));
  EXPECT_LE(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14 * l.norm());
}

TEST(Laplacian, RowSumsVanishOnRandomGraphs) {
  rng::Stream stream(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(stream.raw() % 7);
    MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = i == j ? 0.0 : stream.uniform(0.0, 5.0);
    const MatrixXd l = graphs::laplacian(graphs::Digraph(a));
    EXPECT_LE(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14 * std::max(1.0, l.norm()));
  }
}

TEST(Digraph, RejectsBadAdjacency) {
  MatrixXd diag = MatrixXd::Identity(2, 2);
  EXPECT_THROW(graphs::Digraph{diag}, graphs::GraphError);
  MatrixXd neg = MatrixXd::Zero(2, 2);
  neg(0, 1) = -1;
  EXPECT_THROW(graphs::Digraph{neg}, graphs::GraphError);
}

TEST(Balanced, RingSingleEdgeSymmetric) {
  EXPECT_TRUE(graphs::is_balanced(ring4()));

  MatrixXd single = MatrixXd::Zero(2, 2);
  single(1, 0) = 1;
  EXPECT_FALSE(graphs::is_balanced(graphs::Digraph(single)));

  rng::Stream stream(5);
  MatrixXd sym = MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) sym(i, j) = sym(j, i) = stream.uniform(0.0, 3.0);
  EXPECT_TRUE(graphs::is_balanced(graphs::Digraph(sym)));
}

TEST(Balanced, ColumnSumsOfLaplacianVanish) {
  rng::Stream stream(11);
  for (int trial = 0; trial < 10; ++trial) {
    const graphs::Digraph g = random_balanced(6, stream);
    ASSERT_TRUE(graphs::is_balanced(g));
    const MatrixXd l = graphs::laplacian(g);
    EXPECT_LE(l.colwise().sum().cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, l.norm()));
  }
}

TEST(SpanningTree, RingDisjointAndChords) {
  {
    std::vector<graphs::Digraph> gs{ring4()};
    EXPECT_TRUE(graphs::union_has_spanning_tree(graphs::TopologyEnsemble(std::move(gs))));
  }
  {
    MatrixXd a = MatrixXd::Zero(4, 4);  // 1 <-> 2 and 3 <-> 4 only
    a(0, 1) = a(1, 0) = 1;
    a(2, 3) = a(3, 2) = 1;
    std::vector<graphs::Digraph> gs{graphs::Digraph(a)};
    EXPECT_FALSE(graphs::union_has_spanning_tree(graphs::TopologyEnsemble(std::move(gs))));
  }
  {
    MatrixXd chords = MatrixXd::Zero(4, 4);
    chords(2, 0) = chords(0, 2) = 1;
    chords(3, 1) = chords(1, 3) = 1;
    std::vector<graphs::Digraph> gs{ring4(), graphs::Digraph(chords)};
    const graphs::TopologyEnsemble e(std::move(gs));
    EXPECT_TRUE(graphs::union_has_spanning_tree(e));
    // union Laplacian is the elementwise sum
    EXPECT_TRUE(
        e.union_laplacian().isApprox(e.laplacian(0) + e.laplacian(1), 1e-14));
  }
}

TEST(Spectral, DirectedRing) {
  std::vector<graphs::Digraph> gs{ring4()};
  const auto sc = graphs::spectral_constants(graphs::TopologyEnsemble(std::move(gs)));
  // circulant L: eigenvalues of L^T L are {0, 2, 4, 2}, of L + L^T are
  // 2 - 2 cos(2 pi k / 4) = {0, 2, 4, 2}
  EXPECT_NEAR(sc.lambda_max, 4.0, 1e-12);
  EXPECT_NEAR(sc.lambda_min2, 2.0, 1e-12);
  EXPECT_NEAR(sc.kappa, 1.0, 1e-12);
}

TEST(Spectral, TwoNodeComplete) {
  MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  std::vector<graphs::Digraph> gs{graphs::Digraph(a)};
  const auto sc = graphs::spectral_constants(graphs::TopologyEnsemble(std::move(gs)));
  EXPECT_NEAR(sc.lambda_max, 4.0, 1e-12);
  EXPECT_NEAR(sc.lambda_min2, 4.0, 1e-12);
  EXPECT_NEAR(sc.kappa, 1.0, 1e-12);
}

TEST(Spectral, ProjectorIdempotentAndKappaOne) {
  rng::Stream stream(17);
  for (int n = 2; n <= 9; ++n) {
    const MatrixXd m = graphs::mean_removal_projector(n);
    EXPECT_LE((m * m - m).cwiseAbs().maxCoeff(), 1e-14);
    std::vector<graphs::Digraph> gs{random_balanced(n, stream)};
    EXPECT_NEAR(graphs::spectral_constants(graphs::TopologyEnsemble(std::move(gs))).kappa, 1.0,
                1e-12);
  }
}

TEST(Spectral, BalancedConnectedUnionHasPositiveLambdaMin2) {
  rng::Stream stream(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(stream.raw() % 5);
    std::vector<graphs::Digraph> gs;
    gs.push_back(random_balanced(n, stream));
    gs.push_back(random_balanced(n, stream));
    const graphs::TopologyEnsemble e(std::move(gs));
    ASSERT_TRUE(graphs::union_has_spanning_tree(e));
    EXPECT_GT(graphs::spectral_constants(e).lambda_min2, 0.0);
  }
}
