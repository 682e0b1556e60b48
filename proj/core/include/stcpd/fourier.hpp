#pragma once

#include "stcpd/tensor.hpp"

namespace stcpd {

/**
 * Real Fourier design on t = 0..n-1 with period T = n:
 *   column 0        1 / sqrt(T)
 *   column 2b - 1   sqrt(2/T) sin(2 pi b t / T)
 *   column 2b       sqrt(2/T) cos(2 pi b t / T),   b = 1..harmonics
 */
struct FourierBasis {
  double period = 0.0;
  Index n_points = 0;
  Index harmonics = 0;
  Matrix design;

  Index n_functions() const { return 1 + 2 * harmonics; }
};

/// Requires n_points >= 2 * harmonics + 1.
FourierBasis build_fourier_basis(Index n_points, Index harmonics);

/// Per-location functional coefficients, one row per location. Row j holds
/// the coefficients of variable 0, then variable 1, and so on.
struct FunctionalCoefficients {
  Matrix theta;
  Index n_vars = 0;
  Index n_functions = 0;
  bool column_centered = false;
};

/**
 * Least-squares Fourier coefficients of every (temporally centered)
 * location/variable series, assembled into a J x K*(1+2*harmonics) matrix
 * whose columns are then centered across locations.
 */
FunctionalCoefficients fit_coefficients(const DenseTensor3& t, const FourierBasis& basis);

/// Same fit; `slice_sum` also receives X(:,:,0) + ... + X(:,:,K-1) (I x J),
/// accumulated during the single pass over the data.
FunctionalCoefficients fit_coefficients(const DenseTensor3& t, const FourierBasis& basis,
                                        Matrix& slice_sum);

}  // namespace stcpd
