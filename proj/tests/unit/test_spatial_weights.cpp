#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stcpd/spatial_weights.hpp"

namespace stcpd {
namespace {

Matrix dense(const SpatialWeights& w) { return Matrix(w.matrix()); }

SpatialWeights ring(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index j = 0; j < n; ++j) edges.emplace_back(j, (j + 1) % n);
  return SpatialWeights::from_edges(n, edges, true);
}

TEST(WeightScheme, Parse) {
  EXPECT_EQ(WeightScheme::parse("queen").kind, WeightScheme::Kind::Queen);
  const auto k = WeightScheme::parse("knn:4");
  EXPECT_EQ(k.kind, WeightScheme::Kind::Knn);
  EXPECT_EQ(k.neighbours, 4);
  EXPECT_EQ(k.to_string(), "knn:4");
  EXPECT_THROW(WeightScheme::parse("knn:0"), std::invalid_argument);
  EXPECT_THROW(WeightScheme::parse("rook"), std::invalid_argument);
  EXPECT_THROW(WeightScheme::parse("knn:x"), std::invalid_argument);
}

TEST(GridWeights, QueenTwoByTwo) {
  const Matrix w = dense(build_grid_weights(GridSpec::full(2, 2), WeightScheme::queen()));
  for (Index a = 0; a < 4; ++a) {
    for (Index b = 0; b < 4; ++b) EXPECT_NEAR(w(a, b), a == b ? 0.0 : 1.0 / 3.0, 1e-15);
  }
}

TEST(GridWeights, QueenLine) {
  const Matrix w = dense(build_grid_weights(GridSpec::line(3), WeightScheme::queen()));
  EXPECT_EQ(w.row(0), Eigen::RowVector3d(0, 1, 0));
  EXPECT_EQ(w.row(1), Eigen::RowVector3d(0.5, 0, 0.5));
  EXPECT_EQ(w.row(2), Eigen::RowVector3d(0, 1, 0));
}

TEST(GridWeights, QueenInteriorHasEightNeighbours) {
  const auto w = build_grid_weights(GridSpec::full(4, 5), WeightScheme::queen());
  EXPECT_EQ(w.neighbour_count(1 * 5 + 2), 8);
  EXPECT_EQ(w.neighbour_count(0), 3);
  EXPECT_EQ(w.neighbour_count(4), 3);
  EXPECT_EQ(w.neighbour_count(5), 5);
}

TEST(GridWeights, InvariantsOnMaskedGrid) {
  std::vector<bool> active(6 * 7, true);
  active[10] = active[11] = active[30] = false;
  const GridSpec g(6, 7, active);
  for (const auto& scheme : {WeightScheme::queen(), WeightScheme::knn(3)}) {
    const auto w = build_grid_weights(g, scheme);
    const Matrix m = dense(w);
    ASSERT_EQ(m.rows(), g.active_count());
    EXPECT_TRUE(w.row_normalized());
    EXPECT_EQ(m.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(m.minCoeff(), 0.0);
    for (Index r = 0; r < m.rows(); ++r) EXPECT_NEAR(m.row(r).sum(), 1.0, 1e-12);
    for (Index a = 0; a < m.rows(); ++a) {
      for (Index b = 0; b < m.rows(); ++b) EXPECT_EQ(m(a, b) > 0.0, m(b, a) > 0.0);
    }
  }
}

TEST(GridWeights, KnnNeighboursAtLeastN) {
  const auto w = build_grid_weights(GridSpec::full(5, 5), WeightScheme::knn(4));
  for (Index j = 0; j < 25; ++j) EXPECT_GE(w.neighbour_count(j), 4);
}

TEST(GridWeights, IsolatedCellNamed) {
  // Cell (0,0) active, its neighbours inactive, the far corner block active.
  std::vector<bool> active(4 * 4, false);
  active[0] = true;
  active[10] = active[11] = active[14] = active[15] = true;
  try {
    build_grid_weights(GridSpec(4, 4, active), WeightScheme::queen());
    FAIL() << "expected an isolated-cell error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("cell 0"), std::string::npos) << e.what();
  }
}

TEST(GridWeights, SingleCellRejected) {
  EXPECT_THROW(build_grid_weights(GridSpec::line(1), WeightScheme::queen()), std::invalid_argument);
}

TEST(SpatialWeightsEdges, RejectsSelfLoop) {
  EXPECT_THROW(SpatialWeights::from_edges(3, {{1, 1}}, true), std::invalid_argument);
}

TEST(MoransIndex, AlternatingRingIsMinusOne) {
  Vector x(8);
  for (Index j = 0; j < 8; ++j) x(j) = j % 2 ? -1.0 : 1.0;
  EXPECT_NEAR(morans_index(x, ring(8)), -1.0, 1e-10);
}

TEST(MoransIndex, RampOnLineIsPositive) {
  Vector x = Vector::LinSpaced(8, 0.0, 7.0);
  EXPECT_GT(morans_index(x, build_grid_weights(GridSpec::line(8), WeightScheme::queen())), 0.0);
}

TEST(MoransIndex, TranslationAndScaleInvariance) {
  const auto w = build_grid_weights(GridSpec::full(6, 6), WeightScheme::queen());
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = oracle::random_matrix(36, 1, rng).col(0);
    const double base = morans_index(x, w);
    EXPECT_NEAR(morans_index((x.array() + 17.0).matrix(), w), base, 1e-12);
    EXPECT_NEAR(morans_index(x * 3.5, w), base, 1e-12);
    EXPECT_NEAR(morans_index(x * -0.25, w), base, 1e-12);
  }
}

TEST(MoransIndex, MatchesDenseFormula) {
  std::mt19937_64 rng(2);
  // Unnormalized weights exercise the J / S0 factor.
  std::vector<std::pair<Index, Index>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}};
  const auto w = SpatialWeights::from_edges(5, edges, false, 2.0);
  const Vector x = oracle::random_matrix(5, 1, rng).col(0);
  EXPECT_NEAR(morans_index(x, w), oracle::morans_index(x, dense(w)), 1e-12);
}

TEST(MoransIndex, ConstantInputThrows) {
  EXPECT_THROW(morans_index(Vector::Constant(8, 2.0), ring(8)), std::invalid_argument);
}

}  // namespace
}  // namespace stcpd
