#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace stcpd {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Extents of an order-3 tensor: time steps, locations, variables.
struct Dims {
  Index time = 0;
  Index space = 0;
  Index vars = 0;

  Index operator[](int mode) const { return mode == 0 ? time : (mode == 1 ? space : vars); }
  Index total() const { return time * space * vars; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

/// Optional axis metadata carried alongside the values.
struct AxisLabels {
  std::vector<std::string> time;
  std::vector<std::string> space;
  std::vector<std::string> vars;
};

/**
 * Dense order-3 tensor, immutable once constructed.
 *
 * Storage is column-major by mode 1: element (i, j, k) lives at
 * i + I*j + I*J*k (0-based). The mode-1 unfolding is therefore a plain
 * reshape of the buffer, and each frontal slice X(:, :, k) is a contiguous
 * I x J column-major block.
 */
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  DenseTensor3(Dims dims, std::vector<double> values, AxisLabels labels = {});

  static DenseTensor3 zeros(Dims dims);

  const Dims& dims() const noexcept { return dims_; }
  Index size() const noexcept { return dims_.total(); }
  std::span<const double> values() const noexcept { return values_; }
  const AxisLabels& labels() const noexcept { return labels_; }

  double operator()(Index i, Index j, Index k) const {
    return values_[static_cast<std::size_t>(i + dims_.time * (j + dims_.space * k))];
  }

  /// Mode-1 unfolding viewed in place (I x JK).
  Eigen::Map<const Matrix> mode1() const {
    return {values_.data(), dims_.time, dims_.space * dims_.vars};
  }

  /// Frontal slice X(:, :, k) viewed in place (I x J).
  Eigen::Map<const Matrix> slice(Index k) const {
    return {values_.data() + dims_.time * dims_.space * k, dims_.time, dims_.space};
  }

  double frobenius_norm() const;
  bool all_finite() const;

 private:
  Dims dims_{};
  std::vector<double> values_;
  AxisLabels labels_;
};

/**
 * Mode-n unfolding (mode in {1, 2, 3}).
 *
 * Row index is the index along the chosen mode; the remaining two indices
 * form the column with the lower mode varying fastest:
 *   mode 1: (i, j + J*k), mode 2: (j, i + I*k), mode 3: (k, i + I*j).
 * This ordering matches khatri_rao(C, B), khatri_rao(C, A) and
 * khatri_rao(B, A) respectively.
 */
Matrix unfold(const DenseTensor3& t, int mode);
DenseTensor3 fold(const Matrix& m, int mode, Dims dims);

/// Column-wise Kronecker product: row (p, q) of the result is p * rows(m2) + q.
Matrix khatri_rao(const Matrix& m1, const Matrix& m2);

/// Factor matrices for the three modes, indexed 0..2.
using Factors = std::array<Matrix, 3>;

struct CpModel {
  Vector weights;
  Factors factors;

  Index rank() const { return weights.size(); }
  Dims dims() const { return {factors[0].rows(), factors[1].rows(), factors[2].rows()}; }
};

/// Sum over r of weights[r] * a_r o b_r o c_r.
DenseTensor3 cp_reconstruct(const CpModel& m);

/// ||estimate - reference||_F / ||reference||_F over all entries.
double relative_error(const DenseTensor3& estimate, const DenseTensor3& reference);

/// Relative error of a CP model against a tensor without materializing the
/// reconstruction.
double relative_error(const CpModel& m, const DenseTensor3& reference);
/// ||reconstruction - reference||_F, computed one frontal slice at a time.
double residual_norm(const CpModel& m, const DenseTensor3& reference);

/**
 * Matricized tensor times Khatri-Rao product for mode `mode` (0-based):
 * the unfolding X_(mode) multiplied by the Khatri-Rao product of the other
 * two factors, computed slice by slice without forming either operand.
 */
Matrix mttkrp(const DenseTensor3& t, const Factors& f, int mode);

/// Hadamard product of the Gram matrices of every factor except `mode`.
Matrix gram_hadamard(const Factors& f, int mode);

/**
 * Least-squares update of factor `mode` with the other two fixed:
 *   F = X_(n) KR (G + ridge * I)^{-1},  G = Hadamard of the other Grams.
 */
Matrix solve_factor(const DenseTensor3& t, const Factors& f, int mode, double ridge);

}  // namespace stcpd
