#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "stcpd/grid.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {

struct WeightScheme {
  enum class Kind { Queen, Knn };
  Kind kind = Kind::Queen;
  int neighbours = 0;  // only for Knn

  static WeightScheme queen() { return {}; }
  static WeightScheme knn(int n) { return {Kind::Knn, n}; }

  /// Accepts "queen" or "knn:N".
  static WeightScheme parse(const std::string& text);
  std::string to_string() const;
};

/// Sparse spatial weights over J locations. Diagonal is always zero.
class SpatialWeights {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SpatialWeights() = default;

  /// Builds W from undirected or directed edges with the given weights.
  /// Self loops are rejected. Duplicate edges keep the larger weight.
  static SpatialWeights from_edges(Index size,
                                   const std::vector<std::pair<Index, Index>>& edges,
                                   bool row_normalize, double weight = 1.0);

  static SpatialWeights from_matrix(SparseMatrix w, bool row_normalized);

  Index size() const noexcept { return w_.rows(); }
  bool row_normalized() const noexcept { return row_normalized_; }
  const SparseMatrix& matrix() const noexcept { return w_; }
  double total_weight() const { return w_.sum(); }
  Index neighbour_count(Index j) const;

 private:
  SparseMatrix w_;
  bool row_normalized_ = false;
};

/**
 * Queen contiguity links each active cell to its active 8-neighbours with
 * weight 1. Knn(n) links each cell to its n nearest active cells (grid
 * distance, or great-circle distance when the grid carries lat/lon) and
 * symmetrizes the pattern. Both results are row-normalized.
 *
 * Throws std::invalid_argument naming the first isolated cell.
 */
SpatialWeights build_grid_weights(const GridSpec& g, const WeightScheme& scheme);

/**
 * Global Moran's I: (J / S0) * (x'Wx) / (x'x) on the centered vector x.
 * Constant input raises std::invalid_argument.
 */
double morans_index(const Eigen::Ref<const Vector>& x, const SpatialWeights& w);

}  // namespace stcpd
