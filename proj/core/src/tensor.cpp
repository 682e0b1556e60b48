#include "stcpd/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace stcpd {

std::string to_string(const Dims& d) {
  return std::to_string(d.time) + "x" + std::to_string(d.space) + "x" + std::to_string(d.vars);
}

DenseTensor3::DenseTensor3(Dims dims, std::vector<double> values, AxisLabels labels)
    : dims_(dims), values_(std::move(values)), labels_(std::move(labels)) {
  if (dims.time < 0 || dims.space < 0 || dims.vars < 0) {
    throw std::invalid_argument("DenseTensor3: negative extent");
  }
  if (static_cast<Index>(values_.size()) != dims.total()) {
    throw std::invalid_argument("DenseTensor3: " + std::to_string(values_.size()) +
                                " values for dims " + to_string(dims));
  }
}

DenseTensor3 DenseTensor3::zeros(Dims dims) {
  return DenseTensor3(dims, std::vector<double>(static_cast<std::size_t>(dims.total()), 0.0));
}

double DenseTensor3::frobenius_norm() const {
  return Eigen::Map<const Vector>(values_.data(), size()).norm();
}

bool DenseTensor3::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

}  // namespace

Matrix unfold(const DenseTensor3& t, int mode) {
  check_mode(mode);
  const auto [I, J, K] = t.dims();
  switch (mode) {
    case 1:
      return t.mode1();
    case 2: {
      Matrix m(J, I * K);
      for (Index k = 0; k < K; ++k) m.middleCols(I * k, I) = t.slice(k).transpose();
      return m;
    }
    default: {
      Matrix m(K, I * J);
      for (Index k = 0; k < K; ++k) {
        m.row(k) = t.slice(k).reshaped().transpose();
      }
      return m;
    }
  }
}

DenseTensor3 fold(const Matrix& m, int mode, Dims dims) {
  check_mode(mode);
  const auto [I, J, K] = dims;
  const Index rows = dims[mode - 1];
  if (m.rows() != rows || m.cols() * rows != dims.total()) {
    throw std::invalid_argument("fold: matrix shape does not match dims " + to_string(dims));
  }
  std::vector<double> values(static_cast<std::size_t>(dims.total()));
  Eigen::Map<Matrix> out(values.data(), I, J * K);
  switch (mode) {
    case 1:
      out = m;
      break;
    case 2:
      for (Index k = 0; k < K; ++k) out.middleCols(J * k, J) = m.middleCols(I * k, I).transpose();
      break;
    default:
      for (Index k = 0; k < K; ++k) {
        out.middleCols(J * k, J) = m.row(k).reshaped(I, J);
      }
      break;
  }
  return DenseTensor3(dims, std::move(values));
}

Matrix khatri_rao(const Matrix& m1, const Matrix& m2) {
  if (m1.cols() != m2.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ (" + std::to_string(m1.cols()) +
                                " vs " + std::to_string(m2.cols()) + ")");
  }
  const Index p = m1.rows();
  const Index q = m2.rows();
  Matrix out(p * q, m1.cols());
  for (Index r = 0; r < m1.cols(); ++r) {
    for (Index a = 0; a < p; ++a) {
      out.col(r).segment(a * q, q) = m1(a, r) * m2.col(r);
    }
  }
  return out;
}

namespace {

void check_model(const CpModel& m) {
  const Index R = m.rank();
  if (R < 1) throw std::invalid_argument("CP model rank must be >= 1");
  for (const auto& f : m.factors) {
    if (f.cols() != R) {
      throw std::invalid_argument("CP model factor has " + std::to_string(f.cols()) +
                                  " columns, expected " + std::to_string(R));
    }
  }
}

}  // namespace

DenseTensor3 cp_reconstruct(const CpModel& m) {
  check_model(m);
  const Dims d = m.dims();
  std::vector<double> values(static_cast<std::size_t>(d.total()));
  const Matrix& A = m.factors[0];
  const Matrix& B = m.factors[1];
  const Matrix& C = m.factors[2];
  for (Index k = 0; k < d.vars; ++k) {
    Eigen::Map<Matrix> slice(values.data() + d.time * d.space * k, d.time, d.space);
    const Vector scale = m.weights.cwiseProduct(C.row(k).transpose());
    slice.noalias() = A * scale.asDiagonal() * B.transpose();
  }
  return DenseTensor3(d, std::move(values));
}

double relative_error(const DenseTensor3& estimate, const DenseTensor3& reference) {
  if (estimate.dims() != reference.dims()) {
    throw std::invalid_argument("relative_error: dims differ (" + to_string(estimate.dims()) +
                                " vs " + to_string(reference.dims()) + ")");
  }
  const double ref = reference.frobenius_norm();
  if (!(ref > 0.0)) throw std::invalid_argument("relative_error: reference has zero norm");
  const Eigen::Map<const Vector> e(estimate.values().data(), estimate.size());
  const Eigen::Map<const Vector> r(reference.values().data(), reference.size());
  return (e - r).norm() / ref;
}

double relative_error(const CpModel& m, const DenseTensor3& reference) {
  const double ref = reference.frobenius_norm();
  if (!(ref > 0.0)) throw std::invalid_argument("relative_error: reference has zero norm");
  return residual_norm(m, reference) / ref;
}

double residual_norm(const CpModel& m, const DenseTensor3& reference) {
  check_model(m);
  if (m.dims() != reference.dims()) {
    throw std::invalid_argument("residual_norm: model dims " + to_string(m.dims()) +
                                " differ from tensor dims " + to_string(reference.dims()));
  }
  const Matrix& A = m.factors[0];
  const Matrix& B = m.factors[1];
  const Matrix& C = m.factors[2];
  Matrix approx(reference.dims().time, reference.dims().space);
  double sq = 0.0;
  for (Index k = 0; k < reference.dims().vars; ++k) {
    const Vector scale = m.weights.cwiseProduct(C.row(k).transpose());
    approx.noalias() = A * scale.asDiagonal() * B.transpose();
    sq += (reference.slice(k) - approx).squaredNorm();
  }
  return std::sqrt(sq);
}

Matrix mttkrp(const DenseTensor3& t, const Factors& f, int mode) {
  const auto [I, J, K] = t.dims();
  const Index R = f[static_cast<std::size_t>((mode + 1) % 3)].cols();
  switch (mode) {
    case 0:
      return t.mode1() * khatri_rao(f[2], f[1]);
    case 1: {
      Matrix out = Matrix::Zero(J, R);
      for (Index k = 0; k < K; ++k) {
        out.noalias() += t.slice(k).transpose() * (f[0] * f[2].row(k).asDiagonal());
      }
      return out;
    }
    case 2: {
      Matrix out(K, R);
      Matrix xb(I, R);
      for (Index k = 0; k < K; ++k) {
        xb.noalias() = t.slice(k) * f[1];
        out.row(k) = xb.cwiseProduct(f[0]).colwise().sum();
      }
      return out;
    }
    default:
      throw std::invalid_argument("mttkrp: mode must be 0, 1 or 2");
  }
}

Matrix gram_hadamard(const Factors& f, int mode) {
  const Index R = f[static_cast<std::size_t>((mode + 1) % 3)].cols();
  Matrix g = Matrix::Ones(R, R);
  for (int n = 0; n < 3; ++n) {
    if (n == mode) continue;
    g = g.cwiseProduct(f[static_cast<std::size_t>(n)].transpose() * f[static_cast<std::size_t>(n)]);
  }
  return g;
}

Matrix solve_factor(const DenseTensor3& t, const Factors& f, int mode, double ridge) {
  Matrix g = gram_hadamard(f, mode);
  g.diagonal().array() += ridge;
  const Matrix rhs = mttkrp(t, f, mode);
  return g.ldlt().solve(rhs.transpose()).transpose();
}

}  // namespace stcpd
