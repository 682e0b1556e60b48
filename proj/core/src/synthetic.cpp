#include "stcpd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "seed.hpp"
#include "stcpd/error.hpp"

namespace stcpd {

namespace {

void validate(const SyntheticConfig& cfg) {
  if (cfg.time_steps < 1 || cfg.grid_rows < 1 || cfg.grid_cols < 1 || cfg.vars < 1) {
    throw std::invalid_argument("synthetic: every dimension must be >= 1");
  }
  if (cfg.rank < 1) throw std::invalid_argument("synthetic: rank must be >= 1");
  const Index cells = cfg.grid_rows * cfg.grid_cols;
  const Index clusters = cfg.clusters == 0 ? cfg.rank : cfg.clusters;
  if (clusters < 1) throw std::invalid_argument("synthetic: clusters must be >= 1");
  if (std::max(cfg.rank, clusters) > cells) {
    throw std::invalid_argument("synthetic: rank and clusters must not exceed the grid cell count");
  }
  if (2 * cfg.rank >= cfg.time_steps) {
    throw std::invalid_argument("synthetic: need time_steps > 2 * rank for distinct harmonics");
  }
  if (!(cfg.bump_width > 0.0)) throw std::invalid_argument("synthetic: bump_width must be > 0");
  if (!(cfg.noise >= 0.0)) throw std::invalid_argument("synthetic: noise must be >= 0");
}

double cell_dist2(const GridCell& a, const GridCell& b) {
  const auto dr = static_cast<double>(a.row - b.row);
  const auto dc = static_cast<double>(a.col - b.col);
  return dr * dr + dc * dc;
}

std::vector<GridCell> farthest_point_centers(const GridSpec& g, Index count, std::mt19937_64& rng) {
  const Index J = g.active_count();
  std::vector<GridCell> centers;
  std::vector<double> best(static_cast<std::size_t>(J), std::numeric_limits<double>::infinity());
  Index pick = std::uniform_int_distribution<Index>(0, J - 1)(rng);
  while (static_cast<Index>(centers.size()) < count) {
    centers.push_back(g.cell(pick));
    Index far = 0;
    for (Index j = 0; j < J; ++j) {
      auto& b = best[static_cast<std::size_t>(j)];
      b = std::min(b, cell_dist2(g.cell(j), centers.back()));
      if (b > best[static_cast<std::size_t>(far)]) far = j;
    }
    pick = far;
  }
  return centers;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  const Index I = cfg.time_steps;
  const Index K = cfg.vars;
  const Index R = cfg.rank;
  const Index n_clusters = cfg.clusters == 0 ? R : cfg.clusters;

  SyntheticData out{{}, GridSpec::full(cfg.grid_rows, cfg.grid_cols), {}};
  const GridSpec& grid = out.grid;
  const Index J = grid.active_count();

  std::mt19937_64 site_rng(detail::mix_seed(cfg.seed, 0));
  std::mt19937_64 factor_rng(detail::mix_seed(cfg.seed, 1));
  std::mt19937_64 noise_rng(detail::mix_seed(cfg.seed, 2));

  SyntheticTruth& truth = out.truth;
  truth.centers = farthest_point_centers(grid, std::max(R, n_clusters), site_rng);
  truth.noise = cfg.noise;
  truth.seed = cfg.seed;

  Matrix A(I, R);
  Matrix B(J, R);
  Matrix C(K, R);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> positive(0.5, 1.5);
  const double w2 = 2.0 * cfg.bump_width * cfg.bump_width;
  for (Index r = 0; r < R; ++r) {
    const double p = phase(factor_rng);
    const auto harmonic = static_cast<double>(r + 1);
    for (Index i = 0; i < I; ++i) {
      A(i, r) = std::sin(2.0 * std::numbers::pi * harmonic * static_cast<double>(i) /
                             static_cast<double>(I) + p);
    }
    for (Index j = 0; j < J; ++j) {
      B(j, r) = std::exp(-cell_dist2(grid.cell(j), truth.centers[static_cast<std::size_t>(r)]) / w2);
    }
    for (Index k = 0; k < K; ++k) C(k, r) = positive(factor_rng);
  }
  A.colwise().normalize();
  B.colwise().normalize();
  C.colwise().normalize();

  Vector weights(R);
  const double scale = std::sqrt(static_cast<double>(I * J * K));
  for (Index r = 0; r < R; ++r) {
    weights[r] = scale * (1.0 - 0.5 * static_cast<double>(r) / static_cast<double>(R));
  }
  truth.model = CpModel{weights, {A, B, C}};

  truth.labels.resize(static_cast<std::size_t>(J));
  for (Index j = 0; j < J; ++j) {
    Index best = 0;
    for (Index c = 1; c < n_clusters; ++c) {
      if (cell_dist2(grid.cell(j), truth.centers[static_cast<std::size_t>(c)]) <
          cell_dist2(grid.cell(j), truth.centers[static_cast<std::size_t>(best)])) {
        best = c;
      }
    }
    truth.labels[static_cast<std::size_t>(j)] = best;
  }

  const DenseTensor3 clean = cp_reconstruct(truth.model);
  std::vector<double> values(clean.values().begin(), clean.values().end());
  if (cfg.noise > 0.0) {
    std::normal_distribution<double> normal(0.0, cfg.noise);
    for (double& v : values) v += normal(noise_rng);
  }
  out.tensor = DenseTensor3(clean.dims(), std::move(values));
  return out;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(i, c);
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, Index cols) {
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    const auto row = rows.at(static_cast<std::size_t>(i)).get<std::vector<double>>();
    if (static_cast<Index>(row.size()) != cols) {
      throw FormatError(FormatErrc::LengthMismatch, "truth JSON: ragged factor matrix");
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

std::string truth_to_json(const SyntheticTruth& truth, const SyntheticConfig& cfg) {
  nlohmann::json j;
  j["config"] = {{"time_steps", cfg.time_steps}, {"grid_rows", cfg.grid_rows},
                 {"grid_cols", cfg.grid_cols},   {"vars", cfg.vars},
                 {"rank", cfg.rank},             {"bump_width", cfg.bump_width},
                 {"clusters", cfg.clusters},     {"noise", cfg.noise},
                 {"seed", cfg.seed}};
  j["noise"] = truth.noise;
  j["seed"] = truth.seed;
  j["weights"] = std::vector<double>(truth.model.weights.begin(), truth.model.weights.end());
  j["factors"] = {matrix_json(truth.model.factors[0]), matrix_json(truth.model.factors[1]),
                  matrix_json(truth.model.factors[2])};
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : truth.centers) centers.push_back({c.row, c.col});
  j["centers"] = centers;
  j["labels"] = truth.labels;
  return j.dump(2);
}

SyntheticTruth truth_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SyntheticTruth t;
    t.noise = j.at("noise").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    const auto w = j.at("weights").get<std::vector<double>>();
    const auto R = static_cast<Index>(w.size());
    t.model.weights = Eigen::Map<const Vector>(w.data(), R);
    for (std::size_t n = 0; n < 3; ++n) {
      t.model.factors[n] = matrix_from_json(j.at("factors").at(n), R);
    }
    for (const auto& c : j.at("centers")) t.centers.push_back({c.at(0).get<Index>(), c.at(1).get<Index>()});
    t.labels = j.at("labels").get<std::vector<Index>>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrc::Parse, std::string("truth JSON: ") + e.what());
  }
}

}  // namespace stcpd
