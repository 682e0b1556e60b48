#include "stcpd/spatial_weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stcpd {

WeightScheme WeightScheme::parse(const std::string& text) {
  if (text == "queen") return queen();
  constexpr std::string_view prefix = "knn:";
  if (text.rfind(prefix, 0) == 0) {
    int n = 0;
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec == std::errc() && ptr == last && n >= 1) return knn(n);
  }
  throw std::invalid_argument("weights scheme must be 'queen' or 'knn:N' (N >= 1), got '" + text +
                              "'");
}

std::string WeightScheme::to_string() const {
  return kind == Kind::Queen ? "queen" : "knn:" + std::to_string(neighbours);
}

namespace {

SpatialWeights::SparseMatrix row_normalize(SpatialWeights::SparseMatrix w) {
  for (Index r = 0; r < w.outerSize(); ++r) {
    double sum = 0.0;
    for (SpatialWeights::SparseMatrix::InnerIterator it(w, r); it; ++it) sum += it.value();
    if (sum <= 0.0) continue;
    for (SpatialWeights::SparseMatrix::InnerIterator it(w, r); it; ++it) it.valueRef() /= sum;
  }
  return w;
}

}  // namespace

SpatialWeights SpatialWeights::from_edges(Index size,
                                          const std::vector<std::pair<Index, Index>>& edges,
                                          bool row_normalize_rows, double weight) {
  if (size < 1) throw std::invalid_argument("SpatialWeights: size must be >= 1");
  if (!(weight > 0.0)) throw std::invalid_argument("SpatialWeights: weights must be positive");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= size || b >= size) {
      throw std::invalid_argument("SpatialWeights: edge index out of range");
    }
    if (a == b) throw std::invalid_argument("SpatialWeights: self loop at " + std::to_string(a));
    triplets.emplace_back(a, b, weight);
  }
  SparseMatrix w(size, size);
  w.setFromTriplets(triplets.begin(), triplets.end(),
                    [](double x, double y) { return std::max(x, y); });
  w.makeCompressed();
  return from_matrix(row_normalize_rows ? row_normalize(std::move(w)) : std::move(w),
                     row_normalize_rows);
}

SpatialWeights SpatialWeights::from_matrix(SparseMatrix w, bool row_normalized) {
  if (w.rows() != w.cols()) throw std::invalid_argument("SpatialWeights: matrix must be square");
  for (Index r = 0; r < w.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) {
      if (it.col() == r && it.value() != 0.0) {
        throw std::invalid_argument("SpatialWeights: nonzero diagonal at " + std::to_string(r));
      }
      if (it.value() < 0.0) throw std::invalid_argument("SpatialWeights: negative weight");
    }
  }
  SpatialWeights out;
  out.w_ = std::move(w);
  out.w_.prune(0.0);
  out.row_normalized_ = row_normalized;
  return out;
}

Index SpatialWeights::neighbour_count(Index j) const {
  Index n = 0;
  for (SparseMatrix::InnerIterator it(w_, j); it; ++it) ++n;
  return n;
}

namespace {

double great_circle(double lat1, double lon1, double lat2, double lon2) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * deg;
  const double dlon = (lon2 - lon1) * deg;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * deg) * std::cos(lat2 * deg) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<std::pair<Index, Index>> queen_edges(const GridSpec& g) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index j = 0; j < g.active_count(); ++j) {
    const GridCell c = g.cell(j);
    for (Index dr = -1; dr <= 1; ++dr) {
      for (Index dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        if (auto nb = g.index_of(c.row + dr, c.col + dc)) edges.emplace_back(j, *nb);
      }
    }
  }
  return edges;
}

std::vector<std::pair<Index, Index>> knn_edges(const GridSpec& g, int n) {
  const Index J = g.active_count();
  const Index take = std::min<Index>(n, J - 1);
  std::vector<std::pair<Index, Index>> edges;
  std::vector<std::pair<double, Index>> dist;
  for (Index j = 0; j < J; ++j) {
    dist.clear();
    const GridCell a = g.cell(j);
    for (Index q = 0; q < J; ++q) {
      if (q == j) continue;
      double d = 0.0;
      if (g.has_coordinates()) {
        const auto js = static_cast<std::size_t>(j);
        const auto qs = static_cast<std::size_t>(q);
        d = great_circle(g.lat()[js], g.lon()[js], g.lat()[qs], g.lon()[qs]);
      } else {
        const GridCell b = g.cell(q);
        d = std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
      }
      dist.emplace_back(d, q);
    }
    std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
    for (Index i = 0; i < take; ++i) {
      const Index q = dist[static_cast<std::size_t>(i)].second;
      edges.emplace_back(j, q);
      edges.emplace_back(q, j);  // symmetrize by max
    }
  }
  return edges;
}

}  // namespace

SpatialWeights build_grid_weights(const GridSpec& g, const WeightScheme& scheme) {
  const Index J = g.active_count();
  if (J < 2) throw std::invalid_argument("build_grid_weights: need at least 2 active cells");
  if (scheme.kind == WeightScheme::Kind::Knn && scheme.neighbours < 1) {
    throw std::invalid_argument("build_grid_weights: knn needs at least one neighbour");
  }
  const auto edges =
      scheme.kind == WeightScheme::Kind::Queen ? queen_edges(g) : knn_edges(g, scheme.neighbours);
  SpatialWeights w = SpatialWeights::from_edges(J, edges, true);
  for (Index j = 0; j < J; ++j) {
    if (w.neighbour_count(j) == 0) {
      const GridCell c = g.cell(j);
      throw std::invalid_argument("build_grid_weights: cell " + std::to_string(j) + " (row " +
                                  std::to_string(c.row) + ", col " + std::to_string(c.col) +
                                  ") has no neighbours");
    }
  }
  return w;
}

double morans_index(const Eigen::Ref<const Vector>& x, const SpatialWeights& w) {
  const Index J = x.size();
  if (J != w.size()) {
    throw std::invalid_argument("morans_index: vector length " + std::to_string(J) +
                                " does not match weights size " + std::to_string(w.size()));
  }
  const Vector centered = x.array() - x.mean();
  const double denom = centered.squaredNorm();
  const double scale = x.cwiseAbs().maxCoeff();
  if (!(denom > 0.0) || denom <= 1e-26 * scale * scale * static_cast<double>(J)) {
    throw std::invalid_argument("morans_index: input has zero variance");
  }
  const double s0 = w.total_weight();
  if (!(s0 > 0.0)) throw std::invalid_argument("morans_index: weights are all zero");
  const double num = centered.dot(w.matrix() * centered);
  return (static_cast<double>(J) / s0) * num / denom;
}

}  // namespace stcpd
