#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stcpd/tensor.hpp"

namespace stcpd {

struct GridCell {
  Index row = 0;
  Index col = 0;
};

/**
 * Rectangular grid with an activity mask. Active cells are numbered
 * 0..J-1 in row-major order; that number is the tensor's location index.
 */
class GridSpec {
 public:
  GridSpec() = default;
  /// `active` is row-major over all n_rows * n_cols cells; empty means all active.
  GridSpec(Index n_rows, Index n_cols, std::vector<bool> active = {});

  static GridSpec full(Index n_rows, Index n_cols) { return GridSpec(n_rows, n_cols); }
  /// Single-row grid with `n` active cells; fallback geometry when none is known.
  static GridSpec line(Index n) { return GridSpec(1, n); }

  Index n_rows() const noexcept { return n_rows_; }
  Index n_cols() const noexcept { return n_cols_; }
  Index active_count() const noexcept { return static_cast<Index>(cells_.size()); }
  const std::vector<bool>& active_mask() const noexcept { return active_; }

  GridCell cell(Index j) const { return cells_.at(static_cast<std::size_t>(j)); }
  std::optional<Index> index_of(Index row, Index col) const;

  /// Per-active-cell coordinates in degrees; both vectors have length J.
  void set_coordinates(std::vector<double> lat, std::vector<double> lon);
  bool has_coordinates() const noexcept { return !lat_.empty(); }
  const std::vector<double>& lat() const noexcept { return lat_; }
  const std::vector<double>& lon() const noexcept { return lon_; }

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<bool> active_;
  std::vector<GridCell> cells_;
  std::vector<Index> lookup_;  // row-major cell -> active index, -1 when inactive
  std::vector<double> lat_;
  std::vector<double> lon_;
};

/// GridSpec JSON: {n_rows, n_cols, active: [bool...], lat: [...], lon: [...]}.
/// lat/lon are optional and may cover either every grid cell or only active ones.
GridSpec grid_from_json(const std::string& text);
std::string grid_to_json(const GridSpec& g);
GridSpec load_grid(const std::string& path);
void save_grid(const std::string& path, const GridSpec& g);

}  // namespace stcpd
