#pragma once

#include <cstdint>
#include <vector>

#include "stcpd/fourier.hpp"
#include "stcpd/grid.hpp"
#include "stcpd/spatial_weights.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {

struct StpcaOptions {
  Index harmonics = 5;
  WeightScheme weights = WeightScheme::queen();
  std::uint64_t seed = 0;
  double ridge = 1e-12;
};

struct StpcaResult {
  Vector eigenvalues;   // top-R, algebraically descending, either sign
  Matrix eigenvectors;  // n_features x R, orthonormal columns
  Matrix spatial_scores;  // J x R
};

/// Symmetric Moran operator (1 / 2J) theta' (W + W') theta on column-centered theta.
Matrix moran_operator(const Matrix& theta, const SpatialWeights& w);

/**
 * Spatio-temporal principal components: eigenpairs of the Moran operator,
 * largest algebraic eigenvalue first. theta is re-centered by column, so
 * constant offsets in any coefficient column do not affect the result.
 * Eigenvector signs are fixed so the entry of largest magnitude is positive.
 */
StpcaResult stpca(const FunctionalCoefficients& coeffs, const SpatialWeights& w, Index rank);

struct StpcaInit {
  Factors factors;
  StpcaResult components;
  std::vector<Index> replaced_columns;  // spatial columns that had zero norm
};

/**
 * CP starting point from the spatio-temporal components:
 *   spatial factor  = unit-normalized component scores,
 *   variable factor = all ones,
 *   temporal factor = one ridge least-squares solve given the other two.
 */
StpcaInit stpca_to_cp_init(const DenseTensor3& t, const GridSpec& grid, Index rank,
                           const StpcaOptions& opts = {});

}  // namespace stcpd
