#include "stcpd/spatial_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stcpd {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1..j
    for (std::size_t q = i; q < j; ++q) ranks[order[q]] = mean_rank;
    i = j;
  }
  return ranks;
}

namespace {

// Pearson correlation; nullopt when either side has zero spread.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool has_two_values(std::span<const double> x) {
  return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) != x.end();
}

std::optional<double> try_spearman(std::span<const double> x, std::span<const double> y) {
  if (!has_two_values(x) || !has_two_values(y)) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

void check_variable_and_cell(const DenseTensor3& t, Index variable, Index cell,
                             const char* what) {
  if (variable < 0 || variable >= t.dims().vars) {
    throw std::invalid_argument(std::string(what) + ": variable index " +
                                std::to_string(variable) + " out of range");
  }
  if (cell < 0 || cell >= t.dims().space) {
    throw std::invalid_argument(std::string(what) + ": cell index " + std::to_string(cell) +
                                " out of range");
  }
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: lengths differ");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 observations");
  const auto rho = try_spearman(x, y);
  if (!rho) throw std::invalid_argument("spearman: constant input");
  return *rho;
}

MaybeValues correlation_map(const DenseTensor3& t, Index variable, const SeasonMask& season,
                            Index ref_cell) {
  check_variable_and_cell(t, variable, ref_cell, "correlation_map");
  const Index I = t.dims().time;
  const Index J = t.dims().space;
  if (static_cast<Index>(season.mask.size()) != I) {
    throw std::invalid_argument("correlation_map: season mask length differs from time steps");
  }
  std::vector<Index> steps;
  for (Index i = 0; i < I; ++i) {
    if (season.mask[static_cast<std::size_t>(i)]) steps.push_back(i);
  }
  if (steps.size() < 3) {
    throw std::invalid_argument("correlation_map: season selects fewer than 3 time steps");
  }

  const auto series = [&](Index j) {
    std::vector<double> s(steps.size());
    for (std::size_t q = 0; q < steps.size(); ++q) s[q] = t(steps[q], j, variable);
    return s;
  };
  const std::vector<double> ref = series(ref_cell);
  const bool ref_ok = has_two_values(ref);
  const std::vector<double> ref_ranks = ref_ok ? average_ranks(ref) : std::vector<double>{};

  MaybeValues out(static_cast<std::size_t>(J));
  for (Index j = 0; j < J; ++j) {
    if (j == ref_cell) {
      out[static_cast<std::size_t>(j)] = 1.0;
      continue;
    }
    if (!ref_ok) continue;
    const std::vector<double> s = series(j);
    if (!has_two_values(s)) continue;
    out[static_cast<std::size_t>(j)] = pearson(ref_ranks, average_ranks(s));
  }
  return out;
}

SeasonalAcf seasonal_acf(const DenseTensor3& t, Index variable, Index cell,
                         const SeasonMask& season, std::size_t max_lag, std::size_t min_pairs) {
  check_variable_and_cell(t, variable, cell, "seasonal_acf");
  if (max_lag < 1) throw std::invalid_argument("seasonal_acf: max_lag must be >= 1");
  const auto I = static_cast<std::size_t>(t.dims().time);
  if (season.mask.size() != I) {
    throw std::invalid_argument("seasonal_acf: season mask length differs from time steps");
  }
  SeasonalAcf out;
  out.values.resize(max_lag);
  out.pairs.resize(max_lag, 0);
  std::vector<double> head;
  std::vector<double> tail;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    head.clear();
    tail.clear();
    for (std::size_t i = 0; i + lag < I; ++i) {
      if (!season.mask[i] || !season.mask[i + lag]) continue;
      head.push_back(t(static_cast<Index>(i), cell, variable));
      tail.push_back(t(static_cast<Index>(i + lag), cell, variable));
    }
    out.pairs[lag - 1] = head.size();
    if (head.size() < std::max<std::size_t>(min_pairs, 3)) continue;
    out.values[lag - 1] = try_spearman(head, tail);
  }
  return out;
}

}  // namespace stcpd
