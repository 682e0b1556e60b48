#include "stcpd/stpca.hpp"

#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "stcpd/error.hpp"

namespace stcpd {

Matrix moran_operator(const Matrix& theta, const SpatialWeights& w) {
  const Index J = theta.rows();
  if (J != w.size()) {
    throw std::invalid_argument("moran_operator: theta has " + std::to_string(J) +
                                " rows but weights cover " + std::to_string(w.size()) +
                                " locations");
  }
  // theta' (W + W') theta = S + S' with S = theta' W theta.
  const Matrix lagged = w.matrix() * theta;
  const Matrix s = theta.transpose() * lagged;
  return (s + s.transpose()) / (2.0 * static_cast<double>(J));
}

StpcaResult stpca(const FunctionalCoefficients& coeffs, const SpatialWeights& w, Index rank) {
  const Index features = coeffs.theta.cols();
  if (rank < 1 || rank > features) {
    throw std::invalid_argument("stpca: rank must be in [1, " + std::to_string(features) +
                                "], got " + std::to_string(rank));
  }
  Matrix theta = coeffs.theta;
  theta.rowwise() -= theta.colwise().mean();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(moran_operator(theta, w));
  if (eig.info() != Eigen::Success) throw NumericError("stpca: eigendecomposition failed");

  StpcaResult out;
  out.eigenvalues.resize(rank);
  out.eigenvectors.resize(features, rank);
  for (Index r = 0; r < rank; ++r) {
    const Index src = features - 1 - r;  // solver sorts ascending
    out.eigenvalues[r] = eig.eigenvalues()[src];
    Vector v = eig.eigenvectors().col(src);
    Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v[at] < 0.0) v = -v;
    out.eigenvectors.col(r) = v;
  }
  out.spatial_scores = theta * out.eigenvectors;
  return out;
}

StpcaInit stpca_to_cp_init(const DenseTensor3& t, const GridSpec& grid, Index rank,
                           const StpcaOptions& opts) {
  const auto [I, J, K] = t.dims();
  if (grid.active_count() != J) {
    throw std::invalid_argument("stpca_to_cp_init: grid has " +
                                std::to_string(grid.active_count()) +
                                " active cells but the tensor has " + std::to_string(J) +
                                " locations");
  }
  const FourierBasis basis = build_fourier_basis(I, opts.harmonics);
  if (rank < 1 || rank > K * basis.n_functions()) {
    throw std::invalid_argument("stpca_to_cp_init: rank must be in [1, " +
                                std::to_string(K * basis.n_functions()) + "]");
  }
  Matrix summed;
  const FunctionalCoefficients coeffs = fit_coefficients(t, basis, summed);
  const SpatialWeights weights = build_grid_weights(grid, opts.weights);

  StpcaInit out;
  out.components = stpca(coeffs, weights, rank);

  Matrix spatial = out.components.spatial_scores;
  const double largest = spatial.colwise().norm().maxCoeff();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index r = 0; r < rank; ++r) {
    const double nrm = spatial.col(r).norm();
    if (nrm > 1e-12 * largest && nrm > 0.0) {
      spatial.col(r) /= nrm;
      continue;
    }
    for (Index j = 0; j < J; ++j) spatial(j, r) = normal(rng);
    spatial.col(r).normalize();
    out.replaced_columns.push_back(r);
  }

  out.factors[1] = std::move(spatial);
  out.factors[2] = Matrix::Ones(K, rank);
  // With C = ones the mode-0 MTTKRP collapses to (sum of frontal slices) B
  // and the normal matrix to K B'B.
  const Matrix& B = out.factors[1];
  const Matrix rhs = summed * B;
  Matrix gram = static_cast<double>(K) * (B.transpose() * B);
  gram.diagonal().array() += opts.ridge;
  const Eigen::LDLT<Matrix> ldlt(gram);
  out.factors[0] = ldlt.solve(rhs.transpose()).transpose();
  if (!out.factors[0].allFinite()) {
    throw NumericError("stpca_to_cp_init: temporal factor solve produced non-finite values");
  }
  return out;
}

}  // namespace stcpd
