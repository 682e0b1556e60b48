#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stcpd/grid.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {

/// Planted spatio-temporal CP structure on a full rectangular grid.
struct SyntheticConfig {
  Index time_steps = 365;
  Index grid_rows = 12;
  Index grid_cols = 12;
  Index vars = 3;
  Index rank = 3;
  double bump_width = 1.5;  // Gaussian bump sd, in grid cells
  Index clusters = 0;       // 0 means one cluster per component
  double noise = 0.1;       // iid Gaussian sd added to every entry
  std::uint64_t seed = 0;
};

struct SyntheticTruth {
  CpModel model;                   // unit columns, descending weights
  std::vector<GridCell> centers;   // bump / cluster centers
  std::vector<Index> labels;       // nearest cluster center per cell
  double noise = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  DenseTensor3 tensor;
  GridSpec grid;
  SyntheticTruth truth;
};

/**
 * Spatial columns are Gaussian bumps at well-separated sites (farthest-point
 * sampling from a random start), temporal columns are sinusoids at
 * harmonics 1..R of the series length with random phase, variable columns are
 * random positive. Weights decrease linearly from sqrt(I*J*K).
 */
SyntheticData generate_synthetic(const SyntheticConfig& cfg);

std::string truth_to_json(const SyntheticTruth& truth, const SyntheticConfig& cfg);
SyntheticTruth truth_from_json(const std::string& text);

}  // namespace stcpd
