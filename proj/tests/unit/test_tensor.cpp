#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {
namespace {

DenseTensor3 counting_2x2x2() {
  // t[i,j,k] = i + 2(j-1) + 4(k-1), 1-indexed, i.e. the buffer 1..8.
  return DenseTensor3({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
}

TEST(DenseTensor3, RejectsWrongValueCount) {
  EXPECT_THROW(DenseTensor3({2, 2, 2}, std::vector<double>(7)), std::invalid_argument);
}

TEST(DenseTensor3, ElementAccessFollowsLayout) {
  const auto t = counting_2x2x2();
  EXPECT_EQ(t(0, 0, 0), 1.0);
  EXPECT_EQ(t(1, 0, 0), 2.0);
  EXPECT_EQ(t(0, 1, 0), 3.0);
  EXPECT_EQ(t(0, 0, 1), 5.0);
  EXPECT_EQ(t(1, 1, 1), 8.0);
}

TEST(Unfold, HandEnumeratedMode1) {
  const Matrix m = unfold(counting_2x2x2(), 1);
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 4);
  EXPECT_EQ(m.row(0), Eigen::RowVector4d(1, 3, 5, 7));
  EXPECT_EQ(m.row(1), Eigen::RowVector4d(2, 4, 6, 8));
}

TEST(Unfold, ShapesPerMode) {
  const auto t = oracle::random_tensor({4, 5, 3}, 1);
  EXPECT_EQ(unfold(t, 1).rows(), 4);
  EXPECT_EQ(unfold(t, 1).cols(), 15);
  EXPECT_EQ(unfold(t, 2).rows(), 5);
  EXPECT_EQ(unfold(t, 2).cols(), 12);
  EXPECT_EQ(unfold(t, 3).rows(), 3);
  EXPECT_EQ(unfold(t, 3).cols(), 20);
}

TEST(Unfold, MatchesElementwiseOracle) {
  const auto t = oracle::random_tensor({4, 5, 3}, 2);
  for (int mode = 1; mode <= 3; ++mode) {
    EXPECT_EQ(unfold(t, mode), oracle::unfold(t, mode - 1)) << "mode " << mode;
  }
}

TEST(Unfold, FoldInvertsUnfoldBitExactly) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> ext(1, 7);
    const Dims d{ext(rng), ext(rng), ext(rng)};
    const auto t = oracle::random_tensor(d, seed);
    for (int mode = 1; mode <= 3; ++mode) {
      const auto back = fold(unfold(t, mode), mode, d);
      ASSERT_EQ(back.dims(), d);
      for (Index n = 0; n < t.size(); ++n) {
        ASSERT_EQ(back.values()[static_cast<std::size_t>(n)], t.values()[static_cast<std::size_t>(n)]);
      }
    }
  }
}

TEST(Unfold, RejectsBadMode) {
  const auto t = counting_2x2x2();
  EXPECT_THROW(unfold(t, 0), std::invalid_argument);
  EXPECT_THROW(unfold(t, 4), std::invalid_argument);
}

TEST(KhatriRao, OnesRow) {
  const Matrix ones = Matrix::Ones(1, 3);
  EXPECT_EQ(khatri_rao(ones, ones), Matrix::Ones(1, 3));
}

TEST(KhatriRao, HandExample) {
  Matrix a(2, 1);
  a << 1, 2;
  Matrix b(2, 1);
  b << 3, 4;
  Matrix expected(4, 1);
  expected << 3, 4, 6, 8;
  EXPECT_EQ(khatri_rao(a, b), expected);
}

TEST(KhatriRao, MatchesKroneckerOracleOnRandomShapes) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Index> ext(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const Index r = ext(rng);
    const Matrix a = oracle::random_matrix(ext(rng), r, rng);
    const Matrix b = oracle::random_matrix(ext(rng), r, rng);
    ASSERT_LT((khatri_rao(a, b) - oracle::khatri_rao(a, b)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(KhatriRao, ColumnMismatchThrows) {
  EXPECT_THROW(khatri_rao(Matrix::Ones(2, 2), Matrix::Ones(2, 3)), std::invalid_argument);
}

TEST(CpReconstruct, AllOnesRankOne) {
  CpModel m;
  m.weights = Vector::Ones(1);
  m.factors = {Matrix::Ones(3, 1), Matrix::Ones(4, 1), Matrix::Ones(2, 1)};
  const auto t = cp_reconstruct(m);
  for (double v : t.values()) EXPECT_EQ(v, 1.0);
}

TEST(CpReconstruct, ZeroWeightComponentVanishes) {
  auto m2 = oracle::planted_model({4, 5, 3}, 2, 3);
  m2.weights(1) = 0.0;
  CpModel m1;
  m1.weights = m2.weights.head(1);
  for (int n = 0; n < 3; ++n) m1.factors[static_cast<std::size_t>(n)] = m2.factors[static_cast<std::size_t>(n)].leftCols(1);
  const auto a = cp_reconstruct(m1);
  const auto b = cp_reconstruct(m2);
  for (Index n = 0; n < a.size(); ++n) {
    EXPECT_NEAR(a.values()[static_cast<std::size_t>(n)], b.values()[static_cast<std::size_t>(n)], 1e-15);
  }
}

TEST(CpReconstruct, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(11);
  CpModel m;
  m.weights = Vector::Random(2);
  m.factors = {oracle::random_matrix(4, 2, rng), oracle::random_matrix(5, 2, rng),
               oracle::random_matrix(3, 2, rng)};
  const auto fast = cp_reconstruct(m);
  const auto slow = oracle::reconstruct(m);
  for (Index n = 0; n < fast.size(); ++n) {
    EXPECT_NEAR(fast.values()[static_cast<std::size_t>(n)], slow.values()[static_cast<std::size_t>(n)], 1e-12);
  }
}

TEST(CpReconstruct, ShapeMismatchThrows) {
  CpModel m;
  m.weights = Vector::Ones(2);
  m.factors = {Matrix::Ones(3, 2), Matrix::Ones(4, 1), Matrix::Ones(2, 2)};
  EXPECT_THROW(cp_reconstruct(m), std::invalid_argument);
}

TEST(RelativeError, IdentityIsZero) {
  const auto t = oracle::random_tensor({3, 3, 2}, 5);
  EXPECT_EQ(relative_error(t, t), 0.0);
}

TEST(RelativeError, ZerosGiveOne) {
  const auto t = oracle::random_tensor({3, 3, 2}, 5);
  EXPECT_DOUBLE_EQ(relative_error(DenseTensor3::zeros(t.dims()), t), 1.0);
}

TEST(RelativeError, OneEntryOff) {
  const DenseTensor3 ref({2, 2, 2}, std::vector<double>(8, 1.0));
  std::vector<double> v(8, 1.0);
  v[3] = 0.0;
  EXPECT_NEAR(relative_error(DenseTensor3({2, 2, 2}, v), ref), 1.0 / std::sqrt(8.0), 1e-15);
  EXPECT_NEAR(relative_error(DenseTensor3({2, 2, 2}, v), ref), 0.353553, 1e-6);
}

TEST(RelativeError, ScaledCopy) {
  const auto t = oracle::random_tensor({4, 3, 2}, 9);
  for (double c : {0.0, 0.5, 2.0}) {
    std::vector<double> v(t.values().begin(), t.values().end());
    for (auto& x : v) x *= c;
    EXPECT_NEAR(relative_error(DenseTensor3(t.dims(), v), t), std::abs(c - 1.0), 1e-14) << c;
  }
}

TEST(RelativeError, ZeroReferenceThrows) {
  const auto z = DenseTensor3::zeros({2, 2, 2});
  EXPECT_THROW(relative_error(z, z), std::invalid_argument);
}

TEST(RelativeError, DimsMismatchThrows) {
  EXPECT_THROW(relative_error(DenseTensor3::zeros({2, 2, 2}), oracle::random_tensor({2, 2, 3}, 1)),
               std::invalid_argument);
}

TEST(RelativeError, ModelOverloadMatchesMaterialized) {
  const auto t = oracle::random_tensor({6, 5, 3}, 4);
  const auto m = oracle::planted_model(t.dims(), 2, 4);
  EXPECT_NEAR(relative_error(m, t), oracle::relative_error(oracle::reconstruct(m), t), 1e-13);
}

TEST(Mttkrp, MatchesUnfoldingTimesKhatriRao) {
  const auto t = oracle::random_tensor({5, 4, 3}, 21);
  std::mt19937_64 rng(21);
  const Factors f{oracle::random_matrix(5, 2, rng), oracle::random_matrix(4, 2, rng),
                  oracle::random_matrix(3, 2, rng)};
  const Matrix kr[3] = {oracle::khatri_rao(f[2], f[1]), oracle::khatri_rao(f[2], f[0]),
                        oracle::khatri_rao(f[1], f[0])};
  for (int mode = 0; mode < 3; ++mode) {
    const Matrix expected = oracle::unfold(t, mode) * kr[mode];
    EXPECT_LT((mttkrp(t, f, mode) - expected).cwiseAbs().maxCoeff(), 1e-13) << "mode " << mode;
  }
}

TEST(SolveFactor, SatisfiesNormalEquations) {
  const auto t = oracle::random_tensor({6, 5, 4}, 22);
  std::mt19937_64 rng(22);
  const Factors f{oracle::random_matrix(6, 3, rng), oracle::random_matrix(5, 3, rng),
                  oracle::random_matrix(4, 3, rng)};
  const Matrix kr = oracle::khatri_rao(f[2], f[1]);
  const Matrix x1 = oracle::unfold(t, 0);
  const Matrix a = solve_factor(t, f, 0, 0.0);
  const Matrix residual = (x1 - a * kr.transpose()) * kr;
  EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-10);
}

}  // namespace
}  // namespace stcpd
