#include "stcpd/als.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "stcpd/error.hpp"

namespace stcpd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void fix_column_signs(Matrix& m) {
  for (Index r = 0; r < m.cols(); ++r) {
    Index at = 0;
    m.col(r).cwiseAbs().maxCoeff(&at);
    if (m(at, r) < 0.0) m.col(r) = -m.col(r);
  }
}

// Fills columns [from, cols) with seeded random unit vectors, orthogonal to
// everything to their left while the column space still has room.
void pad_columns(Matrix& m, Index from, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index r = from; r < m.cols(); ++r) {
    Vector v(m.rows());
    for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    Vector w = v;
    if (r < m.rows()) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Index q = 0; q < r; ++q) w -= m.col(q).dot(w) * m.col(q);
      }
    }
    const double nw = w.norm();
    if (r < m.rows() && nw > 1e-8 * v.norm()) {
      m.col(r) = w / nw;
    } else {
      m.col(r) = v.normalized();
    }
  }
}

void check_finite(const Matrix& m, int mode, int iteration) {
  if (!m.allFinite()) {
    throw NumericError("non-finite values in factor " + std::to_string(mode + 1) +
                           " at ALS iteration " + std::to_string(iteration),
                       static_cast<std::size_t>(iteration));
  }
}

void validate(const DenseTensor3& t, const AlsOptions& opts) {
  const Dims d = t.dims();
  if (d.time < 1 || d.space < 1 || d.vars < 1) {
    throw std::invalid_argument("cp_als: every tensor extent must be >= 1, got " + to_string(d));
  }
  if (opts.rank < 1) throw std::invalid_argument("cp_als: rank must be >= 1");
  if (opts.max_iters < 1) throw std::invalid_argument("cp_als: max_iters must be >= 1");
  if (!(opts.fit_tolerance > 0.0)) throw std::invalid_argument("cp_als: fit_tolerance must be > 0");
  if (!(opts.ridge >= 0.0)) throw std::invalid_argument("cp_als: ridge must be >= 0");
  if (!t.all_finite()) throw std::invalid_argument("cp_als: tensor contains non-finite values");
  if (!(t.frobenius_norm() > 0.0)) throw std::invalid_argument("cp_als: tensor has zero norm");
}

}  // namespace

std::string initializer_name(const Initializer& init) {
  struct Visitor {
    std::string operator()(const RandomInit&) const { return "random"; }
    std::string operator()(const HosvdInit&) const { return "hosvd"; }
    std::string operator()(const StpcaInitializer&) const { return "stpca"; }
  };
  return std::visit(Visitor{}, init);
}

const char* to_string(StopReason r) noexcept {
  return r == StopReason::Converged ? "converged" : "max-iters";
}

Factors init_random(Dims dims, Index rank, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("init_random: rank must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Factors f;
  for (int n = 0; n < 3; ++n) {
    Matrix m(dims[n], rank);
    for (Index r = 0; r < rank; ++r) {
      for (Index i = 0; i < dims[n]; ++i) m(i, r) = uniform(rng);
    }
    f[static_cast<std::size_t>(n)] = std::move(m);
  }
  return f;
}

Matrix leading_left_singular_vectors(const Eigen::Ref<const Matrix>& m, Index count) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  count = std::min(count, rows);
  if (count <= 0 || cols == 0) return Matrix(rows, 0);

  // Eigenvectors of the smaller Gram matrix; for tall inputs map back through m.
  const bool wide = rows <= cols;
  Matrix gram = wide ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in leading_left_singular_vectors");
  }
  const Vector& evals = eig.eigenvalues();  // ascending
  const Index n = evals.size();
  const double top = std::max(evals[n - 1], 0.0);
  const double cutoff =
      top * static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * 16.0;

  Index keep = 0;
  while (keep < std::min(count, n) && evals[n - 1 - keep] > cutoff) ++keep;
  if (keep == 0) return Matrix(rows, 0);

  Matrix u(rows, keep);
  if (wide) {
    for (Index r = 0; r < keep; ++r) u.col(r) = eig.eigenvectors().col(n - 1 - r);
  } else {
    Matrix v(cols, keep);
    for (Index r = 0; r < keep; ++r) v.col(r) = eig.eigenvectors().col(n - 1 - r);
    u = m * v;
    // Re-orthonormalize; the Gram route squares the condition number.
    Eigen::HouseholderQR<Matrix> qr(u);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, keep);
    const auto rdiag = qr.matrixQR().diagonal();
    for (Index r = 0; r < keep; ++r) {
      if (rdiag[r] < 0.0) q.col(r) = -q.col(r);
    }
    u = std::move(q);
  }
  fix_column_signs(u);
  return u;
}

Factors init_hosvd(const DenseTensor3& t, Index rank, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("init_hosvd: rank must be >= 1");
  Factors f;
  for (int n = 0; n < 3; ++n) {
    const Index rows = t.dims()[n];
    Matrix u = n == 0 ? leading_left_singular_vectors(t.mode1(), rank)
                      : leading_left_singular_vectors(unfold(t, n + 1), rank);
    Matrix m(rows, rank);
    m.leftCols(u.cols()) = u;
    if (u.cols() < rank) {
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n + 1));
      pad_columns(m, u.cols(), rng);
    }
    f[static_cast<std::size_t>(n)] = std::move(m);
  }
  return f;
}

CpModel normalize_model(const CpModel& m, std::vector<Index>* zero_columns) {
  const Index R = m.rank();
  if (R < 1) throw std::invalid_argument("normalize_model: rank must be >= 1");
  CpModel out = m;
  constexpr double unit_slack = 4.0 * std::numeric_limits<double>::epsilon();
  for (Index r = 0; r < R; ++r) {
    double w = out.weights[r];
    bool zero = false;
    for (auto& f : out.factors) {
      const double nrm = f.col(r).norm();
      if (nrm == 0.0) {
        zero = true;
        f.col(r).setZero();
        f(0, r) = 1.0;
        continue;
      }
      if (std::abs(nrm - 1.0) > unit_slack) {
        f.col(r) /= nrm;
        w *= nrm;
      }
    }
    if (zero) {
      w = 0.0;
      if (zero_columns) zero_columns->push_back(r);
    }
    if (w < 0.0) {
      out.factors[0].col(r) = -out.factors[0].col(r);
      w = -w;
    }
    out.weights[r] = w;
  }

  std::vector<Index> order(static_cast<std::size_t>(R));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return out.weights[a] > out.weights[b]; });
  if (std::is_sorted(order.begin(), order.end())) return out;

  CpModel sorted = out;
  for (Index r = 0; r < R; ++r) {
    const Index src = order[static_cast<std::size_t>(r)];
    sorted.weights[r] = out.weights[src];
    for (std::size_t n = 0; n < 3; ++n) sorted.factors[n].col(r) = out.factors[n].col(src);
  }
  return sorted;
}

AlsResult cp_als_from(const DenseTensor3& t, Factors start, const AlsOptions& opts) {
  validate(t, opts);
  const Index R = opts.rank;
  for (int n = 0; n < 3; ++n) {
    const auto& f = start[static_cast<std::size_t>(n)];
    if (f.rows() != t.dims()[n] || f.cols() != R) {
      throw std::invalid_argument("cp_als: starting factor " + std::to_string(n + 1) + " is " +
                                  std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
                                  ", expected " + std::to_string(t.dims()[n]) + "x" +
                                  std::to_string(R));
    }
  }

  const auto t0 = Clock::now();
  AlsResult result;
  AlsTrace& trace = result.trace;
  Factors f = std::move(start);
  CpModel current{Vector::Ones(R), {}};
  const double norm = t.frobenius_norm();

  for (int it = 1; it <= opts.max_iters; ++it) {
    for (int n = 0; n < 3; ++n) {
      auto& fac = f[static_cast<std::size_t>(n)];
      fac = solve_factor(t, f, n, opts.ridge);
      check_finite(fac, n, it);
      // Scale is re-absorbed by the next block solve; the last mode keeps it.
      if (n < 2) {
        for (Index r = 0; r < R; ++r) {
          const double nrm = fac.col(r).norm();
          if (nrm > 0.0) fac.col(r) /= nrm;
        }
      }
    }
    current.factors = f;
    const double err = residual_norm(current, t) / norm;
    if (!std::isfinite(err)) {
      throw NumericError("non-finite relative error at ALS iteration " + std::to_string(it),
                         static_cast<std::size_t>(it));
    }
    trace.relative_errors.push_back(err);
    trace.iterations = it;
    if (it > 1) {
      const double prev = trace.relative_errors[trace.relative_errors.size() - 2];
      if (std::abs(err - prev) < opts.fit_tolerance) {
        trace.stop = StopReason::Converged;
        break;
      }
    }
  }

  std::vector<Index> zero_columns;
  result.model = normalize_model(current, &zero_columns);
  for (Index r : zero_columns) {
    trace.notes.push_back("component " + std::to_string(r) + " collapsed to zero");
  }
  trace.als_seconds = seconds_since(t0);
  return result;
}

AlsResult cp_als(const DenseTensor3& t, const AlsOptions& opts) {
  validate(t, opts);
  const auto t0 = Clock::now();
  Factors start;
  std::vector<std::string> notes;
  if (std::holds_alternative<RandomInit>(opts.initializer)) {
    start = init_random(t.dims(), opts.rank, opts.seed);
  } else if (std::holds_alternative<HosvdInit>(opts.initializer)) {
    start = init_hosvd(t, opts.rank, opts.seed);
  } else {
    const auto& st = std::get<StpcaInitializer>(opts.initializer);
    StpcaOptions so = st.options;
    so.ridge = opts.ridge;
    so.seed = opts.seed;
    StpcaInit init = stpca_to_cp_init(t, st.grid, opts.rank, so);
    for (Index r : init.replaced_columns) {
      notes.push_back("stpca spatial column " + std::to_string(r) +
                      " had zero norm; replaced by a random unit vector");
    }
    start = std::move(init.factors);
  }
  const double init_seconds = seconds_since(t0);

  AlsResult result = cp_als_from(t, std::move(start), opts);
  result.trace.init_seconds = init_seconds;
  notes.insert(notes.end(), result.trace.notes.begin(), result.trace.notes.end());
  result.trace.notes = std::move(notes);
  return result;
}

}  // namespace stcpd
