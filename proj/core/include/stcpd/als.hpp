#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "stcpd/grid.hpp"
#include "stcpd/stpca.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {

struct RandomInit {};
struct HosvdInit {};
struct StpcaInitializer {
  GridSpec grid;
  StpcaOptions options;
};
using Initializer = std::variant<RandomInit, HosvdInit, StpcaInitializer>;

std::string initializer_name(const Initializer& init);

struct AlsOptions {
  Index rank = 1;
  int max_iters = 500;
  double fit_tolerance = 1e-8;
  double ridge = 1e-12;
  std::uint64_t seed = 0;
  Initializer initializer = RandomInit{};
};

enum class StopReason { Converged, MaxIters };

const char* to_string(StopReason r) noexcept;

struct AlsTrace {
  std::vector<double> relative_errors;  // one per completed sweep
  int iterations = 0;
  StopReason stop = StopReason::MaxIters;
  double init_seconds = 0.0;
  double als_seconds = 0.0;
  std::vector<std::string> notes;
};

struct AlsResult {
  CpModel model;
  AlsTrace trace;
};

/// Entries i.i.d. uniform on [0, 1), deterministic in `seed`.
Factors init_random(Dims dims, Index rank, std::uint64_t seed);

/**
 * Leading left singular vectors of each mode's unfolding. When a mode cannot
 * supply `rank` independent directions, the rest are seeded random unit
 * vectors, orthogonalized against the singular vectors while room remains.
 */
Factors init_hosvd(const DenseTensor3& t, Index rank, std::uint64_t seed = 0);

/// Up to `count` leading left singular vectors of `m`, orthonormal, sign-fixed.
Matrix leading_left_singular_vectors(const Eigen::Ref<const Matrix>& m, Index count);

/**
 * Unit-norm factor columns, scales folded into the weights, components
 * sorted by descending weight. Zero columns get weight 0 and a unit basis
 * column; their indices are appended to `zero_columns` when provided.
 */
CpModel normalize_model(const CpModel& m, std::vector<Index>* zero_columns = nullptr);

/// ALS from an explicit starting point; the first sweep recomputes mode 0.
AlsResult cp_als_from(const DenseTensor3& t, Factors start, const AlsOptions& opts);

/// ALS with the initializer named in `opts`; initialization time is traced.
AlsResult cp_als(const DenseTensor3& t, const AlsOptions& opts);

}  // namespace stcpd
