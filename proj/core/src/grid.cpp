#include "stcpd/grid.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stcpd/error.hpp"

namespace stcpd {

GridSpec::GridSpec(Index n_rows, Index n_cols, std::vector<bool> active)
    : n_rows_(n_rows), n_cols_(n_cols), active_(std::move(active)) {
  if (n_rows < 1 || n_cols < 1) {
    throw std::invalid_argument("GridSpec: n_rows and n_cols must be >= 1");
  }
  const auto n_cells = static_cast<std::size_t>(n_rows * n_cols);
  if (active_.empty()) active_.assign(n_cells, true);
  if (active_.size() != n_cells) {
    throw std::invalid_argument("GridSpec: active mask has " + std::to_string(active_.size()) +
                                " entries, expected " + std::to_string(n_cells));
  }
  lookup_.assign(n_cells, -1);
  for (Index r = 0; r < n_rows; ++r) {
    for (Index c = 0; c < n_cols; ++c) {
      const auto flat = static_cast<std::size_t>(r * n_cols + c);
      if (active_[flat]) {
        lookup_[flat] = static_cast<Index>(cells_.size());
        cells_.push_back({r, c});
      }
    }
  }
}

std::optional<Index> GridSpec::index_of(Index row, Index col) const {
  if (row < 0 || col < 0 || row >= n_rows_ || col >= n_cols_) return std::nullopt;
  const Index j = lookup_[static_cast<std::size_t>(row * n_cols_ + col)];
  if (j < 0) return std::nullopt;
  return j;
}

void GridSpec::set_coordinates(std::vector<double> lat, std::vector<double> lon) {
  if (lat.size() != cells_.size() || lon.size() != cells_.size()) {
    throw std::invalid_argument("GridSpec: lat/lon must have one entry per active cell");
  }
  lat_ = std::move(lat);
  lon_ = std::move(lon);
}

namespace {

std::vector<double> active_subset(const std::vector<double>& all, const GridSpec& g) {
  if (static_cast<Index>(all.size()) == g.active_count()) return all;
  if (static_cast<Index>(all.size()) != g.n_rows() * g.n_cols()) {
    throw FormatError(FormatErrc::LengthMismatch,
                      "grid lat/lon length must equal the active or total cell count");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(g.active_count()));
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (g.active_mask()[i]) out.push_back(all[i]);
  }
  return out;
}

}  // namespace

GridSpec grid_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrc::Parse, std::string("grid JSON: ") + e.what());
  }
  try {
    const auto rows = j.at("n_rows").get<Index>();
    const auto cols = j.at("n_cols").get<Index>();
    std::vector<bool> active;
    if (j.contains("active")) active = j.at("active").get<std::vector<bool>>();
    GridSpec g(rows, cols, std::move(active));
    if (j.contains("lat") || j.contains("lon")) {
      g.set_coordinates(active_subset(j.at("lat").get<std::vector<double>>(), g),
                        active_subset(j.at("lon").get<std::vector<double>>(), g));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrc::Parse, std::string("grid JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatErrc::Parse, std::string("grid JSON: ") + e.what());
  }
}

std::string grid_to_json(const GridSpec& g) {
  nlohmann::json j;
  j["n_rows"] = g.n_rows();
  j["n_cols"] = g.n_cols();
  j["active"] = g.active_mask();
  if (g.has_coordinates()) {
    j["lat"] = g.lat();
    j["lon"] = g.lon();
  }
  return j.dump(2);
}

GridSpec load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrc::Io, "cannot open grid file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return grid_from_json(ss.str());
}

void save_grid(const std::string& path, const GridSpec& g) {
  std::ofstream out(path);
  if (!out) throw FormatError(FormatErrc::Io, "cannot write grid file " + path);
  out << grid_to_json(g) << '\n';
}

}  // namespace stcpd
