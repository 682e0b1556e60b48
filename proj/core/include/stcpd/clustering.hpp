#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stcpd/tensor.hpp"

namespace stcpd {

struct KMeansOptions {
  int n_init = 10;
  int max_iters = 300;
  double tol = 1e-9;  // on the largest squared centroid shift
};

struct ClusterResult {
  Index k = 0;
  std::vector<Index> assignments;  // 0-based cluster ids, every cluster nonempty
  Matrix centroids;                // k x d
  double inertia = 0.0;
  Vector per_sample_silhouette;
  double mean_silhouette = 0.0;
  std::vector<double> inertia_trace;  // winning restart, one entry per Lloyd iteration
  int restart = 0;
};

/**
 * Lloyd's algorithm with k-means++ seeding on the rows of `points`. The best
 * of `n_init` restarts by (inertia, restart index) is returned, with its
 * silhouette filled in. Empty clusters take the point farthest from its
 * current centroid.
 */
ClusterResult kmeans(const Matrix& points, Index k, std::uint64_t seed,
                     const KMeansOptions& opts = {});

struct Silhouette {
  Vector per_sample;
  double mean = 0.0;
};

/// Euclidean silhouette; members of singleton clusters score 0.
Silhouette silhouette(const Matrix& points, std::span<const Index> assignments);

struct SweepRow {
  Index k = 0;
  double mean_silhouette = 0.0;
  double inertia = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> table;
  Index best_k = 0;
  ClusterResult best;
};

/// k-means for every k in [k_min, k_max]; best k maximizes the mean
/// silhouette, ties going to the smaller k.
SweepResult sweep_k(const Matrix& points, Index k_min, Index k_max, std::uint64_t seed,
                    const KMeansOptions& opts = {});

}  // namespace stcpd
