#include "stcpd/fourier.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace stcpd {

FourierBasis build_fourier_basis(Index n_points, Index harmonics) {
  if (harmonics < 0) throw std::invalid_argument("build_fourier_basis: harmonics must be >= 0");
  if (n_points < 2 * harmonics + 1) {
    throw std::invalid_argument("build_fourier_basis: " + std::to_string(n_points) +
                                " points cannot identify " + std::to_string(2 * harmonics + 1) +
                                " basis functions");
  }
  FourierBasis basis;
  basis.n_points = n_points;
  basis.harmonics = harmonics;
  basis.period = static_cast<double>(n_points);
  const double T = basis.period;
  basis.design.resize(n_points, basis.n_functions());
  basis.design.col(0).setConstant(1.0 / std::sqrt(T));
  const double amp = std::sqrt(2.0 / T);
  if (harmonics == 0) return basis;
  // b*t mod n takes only n distinct values, so tabulate one period.
  Vector sin_table(n_points);
  Vector cos_table(n_points);
  for (Index m = 0; m < n_points; ++m) {
    const double arg = 2.0 * std::numbers::pi * static_cast<double>(m) / T;
    sin_table[m] = amp * std::sin(arg);
    cos_table[m] = amp * std::cos(arg);
  }
  for (Index b = 1; b <= harmonics; ++b) {
    for (Index t = 0; t < n_points; ++t) {
      const Index m = (b * t) % n_points;
      basis.design(t, 2 * b - 1) = sin_table[m];
      basis.design(t, 2 * b) = cos_table[m];
    }
  }
  return basis;
}

namespace {

// Phi' X using the reflection symmetry of the equispaced full-period design:
// cos(w(T - t)) = cos(wt) and sin(w(T - t)) = -sin(wt), so cosine rows only
// need x(t) + x(T - t) and sine rows x(t) - x(T - t), halving the products.
// With few harmonics a per-series matrix-vector product beats a packed GEMM.
Matrix fold_project(const FourierBasis& basis, const DenseTensor3& t, Matrix* slice_sum) {
  const auto x = t.mode1();
  const Index locations = t.dims().space;
  if (slice_sum) *slice_sum = Matrix::Zero(t.dims().time, locations);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Matrix& phi = basis.design;
  const Index n = basis.n_points;
  const Index h = basis.harmonics;
  const Index half = (n - 1) / 2;
  const bool has_middle = n % 2 == 0;

  RowMajor cos_rows(h, half);
  RowMajor sin_rows(h, half);
  Vector cos_edge(h);
  Vector cos_middle = Vector::Zero(h);
  Vector sin_middle = Vector::Zero(h);
  for (Index b = 1; b <= h; ++b) {
    cos_rows.row(b - 1) = phi.col(2 * b).segment(1, half).transpose();
    sin_rows.row(b - 1) = phi.col(2 * b - 1).segment(1, half).transpose();
    cos_edge[b - 1] = phi(0, 2 * b);
    if (has_middle) {
      cos_middle[b - 1] = phi(n / 2, 2 * b);
      sin_middle[b - 1] = phi(n / 2, 2 * b - 1);
    }
  }

  Matrix proj(basis.n_functions(), x.cols());
  Vector even(half);
  Vector odd(half);
  Vector c(h);
  Vector s(h);
  for (Index j = 0; j < x.cols(); ++j) {
    const auto col = x.col(j);
    if (slice_sum) slice_sum->col(j % locations) += col;
    proj(0, j) = phi(0, 0) * col.sum();
    if (h == 0) continue;
    even = col.segment(1, half) + col.segment(n - half, half).reverse();
    odd = col.segment(1, half) - col.segment(n - half, half).reverse();
    c.noalias() = cos_rows * even;
    s.noalias() = sin_rows * odd;
    c += col[0] * cos_edge;
    if (has_middle) {
      c += col[n / 2] * cos_middle;
      s += col[n / 2] * sin_middle;
    }
    for (Index b = 1; b <= h; ++b) {
      proj(2 * b - 1, j) = s[b - 1];
      proj(2 * b, j) = c[b - 1];
    }
  }
  return proj;
}

FunctionalCoefficients fit_impl(const DenseTensor3& t, const FourierBasis& basis,
                                Matrix* slice_sum) {
  const auto [I, J, K] = t.dims();
  if (basis.n_points != I) {
    throw std::invalid_argument("fit_coefficients: basis has " + std::to_string(basis.n_points) +
                                " points but the tensor has " + std::to_string(I) + " time steps");
  }
  const Matrix& phi = basis.design;
  const Index nb = basis.n_functions();

  // Phi' (x - mean(x)) for every series at once: Phi' X - (Phi' 1) mean'.
  Matrix proj = fold_project(basis, t, slice_sum);
  const Vector phi_sum = phi.colwise().sum().transpose();
  // Row 0 of the projection is the constant column times each series sum.
  const Eigen::RowVectorXd means = proj.row(0) / (phi(0, 0) * static_cast<double>(I));
  proj.noalias() -= phi_sum * means;

  const Eigen::LDLT<Matrix> gram(phi.transpose() * phi);
  const Matrix gram_inv = gram.solve(Matrix::Identity(nb, nb));
  const Matrix coef = gram_inv * proj;  // nb x (J*K), column j + J*k

  FunctionalCoefficients out;
  out.n_vars = K;
  out.n_functions = nb;
  out.theta.resize(J, K * nb);
  for (Index k = 0; k < K; ++k) {
    out.theta.middleCols(k * nb, nb) = coef.middleCols(k * J, J).transpose();
  }
  out.theta.rowwise() -= out.theta.colwise().mean();
  out.column_centered = true;
  return out;
}

}  // namespace

FunctionalCoefficients fit_coefficients(const DenseTensor3& t, const FourierBasis& basis) {
  return fit_impl(t, basis, nullptr);
}

FunctionalCoefficients fit_coefficients(const DenseTensor3& t, const FourierBasis& basis,
                                        Matrix& slice_sum) {
  return fit_impl(t, basis, &slice_sum);
}

}  // namespace stcpd
