#include "stcpd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "seed.hpp"

namespace stcpd {

namespace {

double sq_dist(const Matrix& points, Index i, const Matrix& centroids, Index c) {
  return (points.row(i) - centroids.row(c)).squaredNorm();
}

Matrix kmeans_plus_plus(const Matrix& points, Index k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  Index pick = std::uniform_int_distribution<Index>(0, n - 1)(rng);
  for (Index c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        double acc = 0.0;
        pick = -1;
        for (Index i = 0; i < n; ++i) {
          const double w = d2[static_cast<std::size_t>(i)];
          if (w <= 0.0) continue;
          acc += w;
          pick = i;
          if (acc > target) break;
        }
      } else {
        // Every point coincides with a chosen centroid: take an unchosen one.
        std::vector<Index> rest;
        for (Index i = 0; i < n; ++i) {
          if (!chosen[static_cast<std::size_t>(i)]) rest.push_back(i);
        }
        pick = rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centroids.row(c) = points.row(pick);
    for (Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, sq_dist(points, i, centroids, c));
    }
  }
  return centroids;
}

struct LloydRun {
  std::vector<Index> labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> trace;
};

// Assigns every point to its nearest centroid (ties to the lower id) and
// returns the inertia; `dist` receives each point's squared distance.
double assign(const Matrix& points, const Matrix& centroids, std::vector<Index>& labels,
              std::vector<double>& dist) {
  const Index n = points.rows();
  const Index k = centroids.rows();
  double inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_d = sq_dist(points, i, centroids, 0);
    for (Index c = 1; c < k; ++c) {
      const double d = sq_dist(points, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = best_d;
    inertia += best_d;
  }
  return inertia;
}

// Moves the farthest point (from a cluster with >= 2 members) into each
// empty cluster. Returns the updated inertia.
double repair_empty(const Matrix& points, Matrix& centroids, std::vector<Index>& labels,
                    std::vector<double>& dist, double inertia) {
  const Index k = centroids.rows();
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Index far = -1;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[i])] < 2) continue;
      if (far < 0 || dist[i] > dist[static_cast<std::size_t>(far)]) far = static_cast<Index>(i);
    }
    if (far < 0) throw std::logic_error("kmeans: cannot repair empty cluster");
    const auto fs = static_cast<std::size_t>(far);
    --sizes[static_cast<std::size_t>(labels[fs])];
    ++sizes[static_cast<std::size_t>(c)];
    inertia -= dist[fs];
    labels[fs] = c;
    dist[fs] = 0.0;
    centroids.row(c) = points.row(far);
  }
  return inertia;
}

Matrix update_centroids(const Matrix& points, const std::vector<Index>& labels, Index k) {
  Matrix centroids = Matrix::Zero(k, points.cols());
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    centroids.row(labels[i]) += points.row(static_cast<Index>(i));
    counts[static_cast<std::size_t>(labels[i])] += 1.0;
  }
  for (Index c = 0; c < k; ++c) centroids.row(c) /= counts[static_cast<std::size_t>(c)];
  return centroids;
}

LloydRun lloyd(const Matrix& points, Matrix centroids, const KMeansOptions& opts) {
  const Index n = points.rows();
  const Index k = centroids.rows();
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  std::vector<Index> previous;

  for (int it = 0; it < opts.max_iters; ++it) {
    double inertia = assign(points, centroids, run.labels, dist);
    inertia = repair_empty(points, centroids, run.labels, dist, inertia);
    run.trace.push_back(inertia);
    const bool unchanged = run.labels == previous;
    previous = run.labels;

    Matrix updated = update_centroids(points, run.labels, k);
    const double shift = (updated - centroids).rowwise().squaredNorm().maxCoeff();
    centroids = std::move(updated);
    if (unchanged || shift <= opts.tol) break;
  }
  // Final labels consistent with the final centroids.
  const double inertia = assign(points, centroids, run.labels, dist);
  repair_empty(points, centroids, run.labels, dist, inertia);
  run.centroids = update_centroids(points, run.labels, k);
  run.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    run.inertia += sq_dist(points, i, run.centroids, run.labels[static_cast<std::size_t>(i)]);
  }
  run.trace.push_back(run.inertia);
  return run;
}

}  // namespace

ClusterResult kmeans(const Matrix& points, Index k, std::uint64_t seed, const KMeansOptions& opts) {
  const Index n = points.rows();
  if (k < 2) throw std::invalid_argument("kmeans: k must be >= 2, got " + std::to_string(k));
  if (k > n) {
    throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(n) + " points");
  }
  if (!points.allFinite()) throw std::invalid_argument("kmeans: points contain non-finite values");
  if (opts.n_init < 1 || opts.max_iters < 1) {
    throw std::invalid_argument("kmeans: n_init and max_iters must be >= 1");
  }

  ClusterResult best;
  bool have = false;
  for (int restart = 0; restart < opts.n_init; ++restart) {
    std::mt19937_64 rng(detail::mix_seed(seed, static_cast<std::uint64_t>(restart)));
    LloydRun run = lloyd(points, kmeans_plus_plus(points, k, rng), opts);
    if (!have || run.inertia < best.inertia) {
      have = true;
      best.k = k;
      best.assignments = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.inertia_trace = std::move(run.trace);
      best.restart = restart;
    }
  }
  const Silhouette s = silhouette(points, best.assignments);
  best.per_sample_silhouette = s.per_sample;
  best.mean_silhouette = s.mean;
  return best;
}

Silhouette silhouette(const Matrix& points, std::span<const Index> assignments) {
  const Index n = points.rows();
  if (static_cast<Index>(assignments.size()) != n) {
    throw std::invalid_argument("silhouette: one assignment per point required");
  }
  if (n == 0) throw std::invalid_argument("silhouette: no points");
  const Index k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  if (*std::min_element(assignments.begin(), assignments.end()) < 0) {
    throw std::invalid_argument("silhouette: negative cluster id");
  }
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index a : assignments) ++sizes[static_cast<std::size_t>(a)];
  const auto present = std::count_if(sizes.begin(), sizes.end(), [](Index s) { return s > 0; });
  if (present < 2) throw std::invalid_argument("silhouette: need at least two clusters");

  Silhouette out;
  out.per_sample.setZero(n);
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) {
    const Index own = assignments[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] < 2) continue;  // singleton: s = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Index q = 0; q < n; ++q) {
      if (q == i) continue;
      sums[static_cast<std::size_t>(assignments[static_cast<std::size_t>(q)])] +=
          (points.row(i) - points.row(q)).norm();
    }
    const double a = sums[static_cast<std::size_t>(own)] /
                     static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] /
                          static_cast<double>(sizes[static_cast<std::size_t>(c)]));
    }
    const double denom = std::max(a, b);
    out.per_sample[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  out.mean = out.per_sample.mean();
  return out;
}

SweepResult sweep_k(const Matrix& points, Index k_min, Index k_max, std::uint64_t seed,
                    const KMeansOptions& opts) {
  const Index n = points.rows();
  if (k_min < 2) throw std::invalid_argument("sweep_k: k_min must be >= 2");
  if (k_max < k_min) throw std::invalid_argument("sweep_k: k_max must be >= k_min");
  if (k_max > n - 1) {
    throw std::invalid_argument("sweep_k: k_max = " + std::to_string(k_max) +
                                " must be at most n - 1 = " + std::to_string(n - 1));
  }
  SweepResult out;
  for (Index k = k_min; k <= k_max; ++k) {
    ClusterResult r = kmeans(points, k, seed, opts);
    out.table.push_back({k, r.mean_silhouette, r.inertia});
    if (out.best_k == 0 || r.mean_silhouette > out.best.mean_silhouette) {
      out.best_k = k;
      out.best = std::move(r);
    }
  }
  return out;
}

}  // namespace stcpd
