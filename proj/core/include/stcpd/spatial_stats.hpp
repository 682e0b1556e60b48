#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stcpd/calendar.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

/**
 * Spearman's rho as the Pearson correlation of average ranks.
 * Requires equal lengths >= 3 and at least two distinct values on each
 * side; otherwise throws std::invalid_argument.
 */
double spearman(std::span<const double> x, std::span<const double> y);

/// Missing entries (constant series, too few pairs) are nullopt, never 0.
using MaybeValues = std::vector<std::optional<double>>;

/**
 * Seasonal Spearman map: entry j correlates the in-season series of `variable`
 * at `ref_cell` with the one at cell j. The reference entry is exactly 1.
 */
MaybeValues correlation_map(const DenseTensor3& t, Index variable, const SeasonMask& season,
                            Index ref_cell);

struct SeasonalAcf {
  MaybeValues values;               // index 0 is lag 1
  std::vector<std::size_t> pairs;   // usable (t, t + lag) pairs per lag
};

/**
 * Spearman autocorrelation at lags 1..max_lag using every pair (t, t + lag)
 * whose endpoints both fall in the season, across year boundaries. Lags with
 * fewer than `min_pairs` pairs are reported missing.
 */
SeasonalAcf seasonal_acf(const DenseTensor3& t, Index variable, Index cell,
                         const SeasonMask& season, std::size_t max_lag,
                         std::size_t min_pairs = 30);

/// Cell whose index is halfway through the flattened list: floor(J / 2).
inline Index default_acf_cell(Index n_cells) { return n_cells / 2; }

}  // namespace stcpd
