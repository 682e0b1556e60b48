#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "output.hpp"
#include "stcpd/als.hpp"
#include "stcpd/clustering.hpp"
#include "stcpd/error.hpp"
#include "stcpd/io.hpp"
#include "stcpd/spatial_stats.hpp"
#include "stcpd/synthetic.hpp"
#include "stcpd/version.hpp"

namespace stcpd::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Options shared by commands that run ALS on a tensor file.
struct TensorOptions {
  std::string tensor;
  std::string grid;  // empty: use the descriptor's grid
};

struct StpcaFlags {
  Index b_max = 5;
  std::string weights = "queen";
};

struct AlsFlags {
  int max_iters = 500;
  double tol = 1e-8;
  double ridge = 1e-12;
};

void add_tensor_flags(CLI::App* cmd, TensorOptions& t) {
  cmd->add_option("--tensor", t.tensor, "STT1 tensor file (descriptor read from <file>.meta.json)")
      ->required();
  cmd->add_option("--grid", t.grid, "grid JSON overriding the descriptor's grid");
}

void add_stpca_flags(CLI::App* cmd, StpcaFlags& s) {
  cmd->add_option("--b-max", s.b_max, "Fourier harmonics for the STPCA initializer")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--weights", s.weights, "spatial weights: queen or knn:N")->capture_default_str();
}

void add_als_flags(CLI::App* cmd, AlsFlags& a) {
  cmd->add_option("--max-iters", a.max_iters, "ALS sweep limit")->capture_default_str();
  cmd->add_option("--tol", a.tol, "stop when the relative error changes less than this")
      ->capture_default_str();
  cmd->add_option("--ridge", a.ridge, "ridge added to each normal-equation solve")
      ->capture_default_str();
}

LoadedTensor load_input(const TensorOptions& t) {
  LoadedTensor in = load_binary(t.tensor);
  if (!t.grid.empty()) {
    GridSpec g = load_grid(t.grid);
    if (g.active_count() != in.tensor.dims().space) {
      throw UsageError("grid '" + t.grid + "' has " + std::to_string(g.active_count()) +
                       " active cells but the tensor has " +
                       std::to_string(in.tensor.dims().space) + " locations");
    }
    in.descriptor.grid = std::move(g);
  }
  return in;
}

Initializer make_initializer(const std::string& name, const GridSpec& grid, const StpcaFlags& s) {
  if (name == "random") return RandomInit{};
  if (name == "hosvd") return HosvdInit{};
  if (name == "stpca") {
    StpcaOptions opts;
    opts.harmonics = s.b_max;
    opts.weights = WeightScheme::parse(s.weights);
    return StpcaInitializer{grid, opts};
  }
  throw UsageError("unknown initializer '" + name + "' (random, hosvd, stpca)");
}

Json dims_json(const Dims& d) { return Json{{"I", d.time}, {"J", d.space}, {"K", d.vars}}; }

Json tensor_params(const TensorOptions& t) {
  return Json{{"tensor", t.tensor}, {"grid", t.grid.empty() ? Json(nullptr) : Json(t.grid)}};
}

void emit(std::ostream& out, const Json& report, const std::string& path = {}) {
  const std::string text = report.dump(2) + "\n";
  if (!path.empty()) write_text(path, text);
  out << text;
}

// ------------------------------------------------------------- decompose

struct DecomposeArgs {
  TensorOptions input;
  StpcaFlags stpca;
  AlsFlags als;
  Index rank = 0;
  std::string init = "stpca";
  std::uint64_t seed = 0;
  std::string out;
};

std::vector<std::string> time_labels(const DatasetDescriptor& d) {
  std::vector<std::string> labels;
  labels.reserve(d.time.size());
  for (std::size_t i = 0; i < d.time.size(); ++i) labels.push_back(format_date(d.time.date(i)));
  return labels;
}

std::vector<std::string> index_labels(Index n) {
  std::vector<std::string> labels;
  for (Index j = 0; j < n; ++j) labels.push_back(std::to_string(j));
  return labels;
}

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  if (a.rank < 1) throw UsageError("--rank must be >= 1");
  const LoadedTensor in = load_input(a.input);

  AlsOptions opts;
  opts.rank = a.rank;
  opts.max_iters = a.als.max_iters;
  opts.fit_tolerance = a.als.tol;
  opts.ridge = a.als.ridge;
  opts.seed = a.seed;
  opts.initializer = make_initializer(a.init, in.descriptor.grid, a.stpca);
  const AlsResult res = cp_als(in.tensor, opts);

  ensure_directory(a.out);
  const auto& f = res.model.factors;
  write_factor_csv(join_path(a.out, "factor_A.csv"), "date", time_labels(in.descriptor), f[0]);
  write_factor_csv(join_path(a.out, "factor_B.csv"), "cell_id", index_labels(f[1].rows()), f[1]);
  write_factor_csv(join_path(a.out, "factor_C.csv"), "variable", in.descriptor.variables, f[2]);
  std::string trace = "iteration,relative_error\n";
  for (std::size_t i = 0; i < res.trace.relative_errors.size(); ++i) {
    trace += std::to_string(i + 1) + "," + format_double(res.trace.relative_errors[i]) + "\n";
  }
  write_text(join_path(a.out, "trace.csv"), trace);

  Json params = tensor_params(a.input);
  params["rank"] = a.rank;
  params["init"] = a.init;
  params["seed"] = a.seed;
  params["b_max"] = a.stpca.b_max;
  params["weights"] = a.stpca.weights;
  params["max_iters"] = a.als.max_iters;
  params["tol"] = a.als.tol;
  params["ridge"] = a.als.ridge;
  params["out"] = a.out;
  Json report = make_report("decompose", std::move(params), {a.seed});
  Json& r = report["results"];
  r["dims"] = dims_json(in.tensor.dims());
  r["final_relative_error"] = res.trace.relative_errors.back();
  r["iterations"] = res.trace.iterations;
  r["stop_reason"] = to_string(res.trace.stop);
  r["weights"] = std::vector<double>(res.model.weights.begin(), res.model.weights.end());
  r["notes"] = res.trace.notes;
  r["files"] = {"factor_A.csv", "factor_B.csv", "factor_C.csv", "trace.csv", "report.json"};
  report["timings"] = {{"init_seconds", res.trace.init_seconds},
                       {"als_seconds", res.trace.als_seconds}};
  emit(out, report, join_path(a.out, "report.json"));
  return kExitOk;
}

// --------------------------------------------------------- compare-inits

struct CompareArgs {
  TensorOptions input;
  StpcaFlags stpca;
  AlsFlags als;
  std::vector<Index> ranks{2, 3};
  std::vector<std::string> inits{"random", "hosvd", "stpca"};
  int seeds = 5;
  std::uint64_t seed_base = 0;
  int threads = 1;
  std::string out;
};

struct RunCell {
  std::string init;
  Index rank = 0;
  std::uint64_t seed = 0;
  AlsResult result;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  for (Index r : a.ranks) {
    if (r < 1) throw UsageError("--ranks entries must be >= 1");
  }
  const LoadedTensor in = load_input(a.input);

  std::vector<RunCell> runs;
  for (const auto& init : a.inits) {
    make_initializer(init, in.descriptor.grid, a.stpca);  // validate names up front
    for (Index rank : a.ranks) {
      for (int s = 0; s < a.seeds; ++s) {
        runs.push_back({init, rank, a.seed_base + static_cast<std::uint64_t>(s), {}});
      }
    }
  }

  const auto t0 = Clock::now();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        RunCell& cell = runs[i];
        AlsOptions opts;
        opts.rank = cell.rank;
        opts.max_iters = a.als.max_iters;
        opts.fit_tolerance = a.als.tol;
        opts.ridge = a.als.ridge;
        opts.seed = cell.seed;
        opts.initializer = make_initializer(cell.init, in.descriptor.grid, a.stpca);
        cell.result = cp_als(in.tensor, opts);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = runs.size();
      }
    }
  };
  const int n_threads = std::min<int>(a.threads, static_cast<int>(runs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  const double total = seconds_since(t0);

  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < a.seeds; ++s) seeds.push_back(a.seed_base + static_cast<std::uint64_t>(s));

  Json params = tensor_params(a.input);
  params["ranks"] = a.ranks;
  params["inits"] = a.inits;
  params["seeds"] = a.seeds;
  params["seed_base"] = a.seed_base;
  params["b_max"] = a.stpca.b_max;
  params["weights"] = a.stpca.weights;
  params["max_iters"] = a.als.max_iters;
  params["tol"] = a.als.tol;
  params["ridge"] = a.als.ridge;
  params["threads"] = a.threads;
  params["out"] = a.out;
  Json report = make_report("compare-inits", std::move(params), seeds);

  Json table = Json::object();
  Json cells = Json::array();
  Json run_rows = Json::array();
  Json run_times = Json::array();
  std::string csv = "initializer";
  for (Index rank : a.ranks) csv += ",rank_" + std::to_string(rank);
  csv += '\n';
  for (const auto& init : a.inits) {
    csv += init;
    Json row = Json::object();
    for (Index rank : a.ranks) {
      std::vector<double> errors;
      double best = 0.0;
      std::uint64_t best_seed = 0;
      double init_sum = 0.0;
      double als_sum = 0.0;
      for (const auto& cell : runs) {
        if (cell.init != init || cell.rank != rank) continue;
        const double err = cell.result.trace.relative_errors.back();
        if (errors.empty() || err < best) {
          best = err;
          best_seed = cell.seed;
        }
        errors.push_back(err);
        init_sum += cell.result.trace.init_seconds;
        als_sum += cell.result.trace.als_seconds;
      }
      std::vector<double> sorted = errors;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
      const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
      row[std::to_string(rank)] = best;
      csv += "," + format_double(best);
      cells.push_back({{"initializer", init},
                       {"rank", rank},
                       {"best_relative_error", best},
                       {"best_seed", best_seed},
                       {"mean_relative_error", mean},
                       {"median_relative_error", median}});
      run_times.push_back({{"initializer", init},
                           {"rank", rank},
                           {"mean_init_seconds", init_sum / static_cast<double>(n)},
                           {"mean_als_seconds", als_sum / static_cast<double>(n)}});
    }
    csv += '\n';
    table[init] = std::move(row);
  }
  Json per_run_times = Json::array();
  for (const auto& cell : runs) {
    run_rows.push_back({{"initializer", cell.init},
                        {"rank", cell.rank},
                        {"seed", cell.seed},
                        {"final_relative_error", cell.result.trace.relative_errors.back()},
                        {"iterations", cell.result.trace.iterations},
                        {"stop_reason", to_string(cell.result.trace.stop)}});
    per_run_times.push_back({{"initializer", cell.init},
                             {"rank", cell.rank},
                             {"seed", cell.seed},
                             {"init_seconds", cell.result.trace.init_seconds},
                             {"als_seconds", cell.result.trace.als_seconds}});
  }

  Json& r = report["results"];
  r["dims"] = dims_json(in.tensor.dims());
  r["table"] = std::move(table);
  r["cells"] = std::move(cells);
  r["runs"] = std::move(run_rows);
  r["files"] = {"table.csv", "report.json"};
  report["timings"] = {{"total_seconds", total},
                       {"cells", std::move(run_times)},
                       {"runs", std::move(per_run_times)}};
  ensure_directory(a.out);
  write_text(join_path(a.out, "table.csv"), csv);
  emit(out, report, join_path(a.out, "report.json"));
  return kExitOk;
}

// --------------------------------------------------------------- cluster

struct ClusterArgs {
  std::string factors;
  int mode = 1;
  Index k_min = 2;
  Index k_max = 12;
  std::uint64_t seed = 0;
  int n_init = 10;
  std::string out;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  std::string path = a.factors;
  if (fs::is_directory(path)) path = join_path(path, a.mode == 1 ? "factor_A.csv" : "factor_B.csv");
  const FactorTable table = read_factor_csv(path);
  const Index n = table.values.rows();
  if (a.k_max > n - 1) {
    throw UsageError("--k-max " + std::to_string(a.k_max) + " exceeds n - 1 = " +
                     std::to_string(n - 1) + " for " + std::to_string(n) + " rows");
  }
  KMeansOptions km;
  km.n_init = a.n_init;
  const auto t0 = Clock::now();
  const SweepResult sweep = sweep_k(table.values, a.k_min, a.k_max, a.seed, km);
  const double elapsed = seconds_since(t0);

  ensure_directory(a.out);
  std::string sil = "k,mean_silhouette,inertia\n";
  Json rows = Json::array();
  for (const auto& row : sweep.table) {
    sil += std::to_string(row.k) + "," + format_double(row.mean_silhouette) + "," +
           format_double(row.inertia) + "\n";
    rows.push_back({{"k", row.k}, {"mean_silhouette", row.mean_silhouette}, {"inertia", row.inertia}});
  }
  write_text(join_path(a.out, "silhouette.csv"), sil);

  std::string assign = table.label_header + ",cluster,silhouette\n";
  for (Index i = 0; i < n; ++i) {
    assign += table.labels[static_cast<std::size_t>(i)] + "," +
              std::to_string(sweep.best.assignments[static_cast<std::size_t>(i)] + 1) + "," +
              format_double(sweep.best.per_sample_silhouette[i]) + "\n";
  }
  write_text(join_path(a.out, "assignments.csv"), assign);

  Json params{{"factors", a.factors}, {"factor_file", path}, {"mode", a.mode},
              {"k_min", a.k_min},     {"k_max", a.k_max},    {"seed", a.seed},
              {"n_init", a.n_init},   {"out", a.out}};
  Json report = make_report("cluster", std::move(params), {a.seed});
  Json& r = report["results"];
  r["n_points"] = n;
  r["n_features"] = table.values.cols();
  r["table"] = std::move(rows);
  r["best_k"] = sweep.best_k;
  r["best_mean_silhouette"] = sweep.best.mean_silhouette;
  std::vector<Index> sizes(static_cast<std::size_t>(sweep.best_k), 0);
  for (Index l : sweep.best.assignments) ++sizes[static_cast<std::size_t>(l)];
  r["cluster_sizes"] = sizes;
  r["files"] = {"silhouette.csv", "assignments.csv", "report.json"};
  report["timings"] = {{"sweep_seconds", elapsed}};
  emit(out, report, join_path(a.out, "report.json"));
  return kExitOk;
}

// ------------------------------------------------------------------- eda

struct EdaArgs {
  TensorOptions input;
  std::string variable = "0";
  std::string season = "all";
  std::string analysis = "both";
  Index ref_cell = -1;
  Index acf_cell = -1;
  std::size_t max_lag = 30;
  std::size_t min_pairs = 30;
  std::string out;
};

Index resolve_variable(const DatasetDescriptor& d, const std::string& v) {
  const auto it = std::find(d.variables.begin(), d.variables.end(), v);
  if (it != d.variables.end()) return it - d.variables.begin();
  Index k = -1;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), k);
  if (ec == std::errc() && ptr == v.data() + v.size() && k >= 0 &&
      k < static_cast<Index>(d.variables.size())) {
    return k;
  }
  throw UsageError("--variable '" + v + "' is neither a variable name nor an index below " +
                   std::to_string(d.variables.size()));
}

int cmd_eda(const EdaArgs& a, std::ostream& out) {
  if (a.analysis != "map" && a.analysis != "acf" && a.analysis != "both") {
    throw UsageError("--analysis must be map, acf or both");
  }
  if (a.max_lag < 1) throw UsageError("--max-lag must be >= 1");
  const LoadedTensor in = load_input(a.input);
  const DatasetDescriptor& d = in.descriptor;
  const Index J = in.tensor.dims().space;
  const Index k = resolve_variable(d, a.variable);
  const Index ref = a.ref_cell < 0 ? default_acf_cell(J) : a.ref_cell;
  const Index acf_cell = a.acf_cell < 0 ? default_acf_cell(J) : a.acf_cell;
  if (ref >= J) throw UsageError("--ref-cell must be below " + std::to_string(J));
  if (acf_cell >= J) throw UsageError("--acf-cell must be below " + std::to_string(J));

  std::vector<Season> chosen;
  if (a.season == "all") {
    chosen.assign(kSeasons.begin(), kSeasons.end());
  } else {
    const auto s = parse_season(a.season);
    if (!s) throw UsageError("--season must be winter, spring, summer, fall or all");
    chosen.push_back(*s);
  }

  const auto t0 = Clock::now();
  const auto masks = season_masks(d.time);
  ensure_directory(a.out);
  Json files = Json::array();
  Json season_rows = Json::array();
  std::size_t total_steps = 0;
  for (const auto& m : masks) total_steps += m.count();
  for (Season s : chosen) {
    const SeasonMask& mask = masks[static_cast<std::size_t>(s)];
    const std::string name = to_string(s);
    Json row{{"season", name}, {"steps", mask.count()}};
    if (a.analysis != "acf") {
      // Too few in-season steps for any correlation: every entry is missing.
      const MaybeValues map = mask.count() < 3 ? MaybeValues(static_cast<std::size_t>(J))
                                               : correlation_map(in.tensor, k, mask, ref);
      if (mask.count() < 3) row["note"] = "fewer than 3 time steps in season; map all missing";
      std::string csv = "cell_id,row,col,value,missing\n";
      std::size_t missing = 0;
      for (Index j = 0; j < J; ++j) {
        const auto& v = map[static_cast<std::size_t>(j)];
        const GridCell c = d.grid.cell(j);
        csv += std::to_string(j) + "," + std::to_string(c.row) + "," + std::to_string(c.col) + ",";
        csv += v ? format_double(*v) + ",0\n" : "NA,1\n";
        missing += v ? 0 : 1;
      }
      const std::string file = "map_" + name + ".csv";
      write_text(join_path(a.out, file), csv);
      files.push_back(file);
      row["map_missing"] = missing;
    }
    if (a.analysis != "map") {
      const SeasonalAcf acf = seasonal_acf(in.tensor, k, acf_cell, mask, a.max_lag, a.min_pairs);
      std::string csv = "lag,value,pairs,missing\n";
      std::size_t missing = 0;
      for (std::size_t l = 0; l < acf.values.size(); ++l) {
        const auto& v = acf.values[l];
        csv += std::to_string(l + 1) + "," + (v ? format_double(*v) : std::string("NA")) + "," +
               std::to_string(acf.pairs[l]) + "," + (v ? "0" : "1") + "\n";
        missing += v ? 0 : 1;
      }
      const std::string file = "acf_" + name + ".csv";
      write_text(join_path(a.out, file), csv);
      files.push_back(file);
      row["acf_missing"] = missing;
    }
    season_rows.push_back(std::move(row));
  }
  files.push_back("report.json");

  Json params = tensor_params(a.input);
  params["variable"] = d.variables[static_cast<std::size_t>(k)];
  params["variable_index"] = k;
  params["season"] = a.season;
  params["analysis"] = a.analysis;
  params["ref_cell"] = ref;
  params["acf_cell"] = acf_cell;
  params["max_lag"] = a.max_lag;
  params["min_pairs"] = a.min_pairs;
  params["out"] = a.out;
  Json report = make_report("eda", std::move(params), {});
  Json& r = report["results"];
  r["dims"] = dims_json(in.tensor.dims());
  r["time_steps"] = d.time.size();
  r["season_steps_total"] = total_steps;
  r["seasons"] = std::move(season_rows);
  r["files"] = std::move(files);
  report["timings"] = {{"analysis_seconds", seconds_since(t0)}};
  emit(out, report, join_path(a.out, "report.json"));
  return kExitOk;
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
  std::vector<Index> dims{365, 12, 12, 3};
  Index rank = 3;
  double noise = 0.1;
  Index clusters = 0;
  double smoothness = 1.5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.dims.size() != 4) throw UsageError("--dims takes I,ROWS,COLS,K");
  SyntheticConfig cfg;
  cfg.time_steps = a.dims[0];
  cfg.grid_rows = a.dims[1];
  cfg.grid_cols = a.dims[2];
  cfg.vars = a.dims[3];
  cfg.rank = a.rank;
  cfg.noise = a.noise;
  cfg.clusters = a.clusters;
  cfg.bump_width = a.smoothness;
  cfg.seed = a.seed;
  const SyntheticData data = generate_synthetic(cfg);

  DatasetDescriptor d = DatasetDescriptor::defaults(data.tensor.dims());
  d.grid = data.grid;
  d.provenance = "synthetic planted CP structure, seed " + std::to_string(a.seed);
  save_binary(a.out, data.tensor, &d);
  write_text(a.out + ".truth.json", truth_to_json(data.truth, cfg) + "\n");

  Json params{{"dims", a.dims},   {"rank", a.rank},       {"noise", a.noise},
              {"clusters", a.clusters}, {"smoothness", a.smoothness}, {"seed", a.seed},
              {"out", a.out}};
  Json report = make_report("synth", std::move(params), {a.seed});
  Json& r = report["results"];
  r["dims"] = dims_json(data.tensor.dims());
  r["crc32"] = stt1_crc(encode_stt1(data.tensor));
  r["frobenius_norm"] = data.tensor.frobenius_norm();
  r["files"] = {a.out, descriptor_path(a.out), a.out + ".truth.json"};
  emit(out, report);
  return kExitOk;
}

// --------------------------------------------------------------- convert

struct ConvertArgs {
  std::string csv;
  std::string descriptor;
  std::string out;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
  const DatasetDescriptor d = descriptor_from_json(read_text_file(a.descriptor));
  const DenseTensor3 t = load_csv_long(a.csv, d);
  save_binary(a.out, t, &d);
  Json params{{"csv", a.csv}, {"descriptor", a.descriptor}, {"out", a.out}};
  Json report = make_report("convert", std::move(params), {});
  report["results"] = {{"dims", dims_json(t.dims())},
                       {"crc32", stt1_crc(encode_stt1(t))},
                       {"files", {a.out, descriptor_path(a.out)}}};
  emit(out, report);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal CP decomposition toolkit", "stcpd"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "CP decomposition of one tensor");
  add_tensor_flags(c_dec, dec.input);
  c_dec->add_option("--rank", dec.rank, "number of CP components")->required();
  c_dec->add_option("--init", dec.init, "random, hosvd or stpca")
      ->capture_default_str()
      ->check(CLI::IsMember({"random", "hosvd", "stpca"}));
  c_dec->add_option("--seed", dec.seed, "seed for the initializer")->capture_default_str();
  add_stpca_flags(c_dec, dec.stpca);
  add_als_flags(c_dec, dec.als);
  c_dec->add_option("--out", dec.out, "output directory")->required();

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare-inits", "relative error per initializer and rank");
  add_tensor_flags(c_cmp, cmp.input);
  c_cmp->add_option("--ranks", cmp.ranks, "comma-separated ranks")
      ->delimiter(',')
      ->capture_default_str();
  c_cmp->add_option("--inits", cmp.inits, "comma-separated initializers")
      ->delimiter(',')
      ->capture_default_str();
  c_cmp->add_option("--seeds", cmp.seeds, "seeds per (initializer, rank)")->capture_default_str();
  c_cmp->add_option("--seed-base", cmp.seed_base, "first seed")->capture_default_str();
  c_cmp->add_option("--threads", cmp.threads, "concurrent runs")->capture_default_str();
  add_stpca_flags(c_cmp, cmp.stpca);
  add_als_flags(c_cmp, cmp.als);
  c_cmp->add_option("--out", cmp.out, "output directory")->required();

  ClusterArgs clu;
  auto* c_clu = app.add_subcommand("cluster", "k-means sweep over factor rows");
  c_clu->add_option("--factors", clu.factors, "decompose output directory or a factor CSV")
      ->required();
  c_clu->add_option("--mode", clu.mode, "1 = temporal rows, 2 = spatial rows")
      ->capture_default_str()
      ->check(CLI::Range(1, 2));
  c_clu->add_option("--k-min", clu.k_min, "smallest k")->capture_default_str();
  c_clu->add_option("--k-max", clu.k_max, "largest k")->capture_default_str();
  c_clu->add_option("--seed", clu.seed, "k-means seed")->capture_default_str();
  c_clu->add_option("--n-init", clu.n_init, "k-means restarts per k")->capture_default_str();
  c_clu->add_option("--out", clu.out, "output directory")->required();

  EdaArgs eda;
  auto* c_eda = app.add_subcommand("eda", "seasonal correlation maps and autocorrelation");
  add_tensor_flags(c_eda, eda.input);
  c_eda->add_option("--variable", eda.variable, "variable name or 0-based index")
      ->capture_default_str();
  c_eda->add_option("--season", eda.season, "winter, spring, summer, fall or all")
      ->capture_default_str();
  c_eda->add_option("--analysis", eda.analysis, "map, acf or both")->capture_default_str();
  c_eda->add_option("--ref-cell", eda.ref_cell, "reference cell for maps (default floor(J/2))");
  c_eda->add_option("--acf-cell", eda.acf_cell, "cell for the ACF (default floor(J/2))");
  c_eda->add_option("--max-lag", eda.max_lag, "largest ACF lag in steps")->capture_default_str();
  c_eda->add_option("--min-pairs", eda.min_pairs, "pairs needed per ACF lag")
      ->capture_default_str();
  c_eda->add_option("--out", eda.out, "output directory")->required();

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "write a planted-structure benchmark tensor");
  c_syn->add_option("--dims", syn.dims, "I,ROWS,COLS,K")->delimiter(',')->capture_default_str();
  c_syn->add_option("--rank", syn.rank, "planted components")->capture_default_str();
  c_syn->add_option("--noise", syn.noise, "Gaussian noise sd")->capture_default_str();
  c_syn->add_option("--clusters", syn.clusters, "spatial clusters (0 = rank)")
      ->capture_default_str();
  c_syn->add_option("--smoothness", syn.smoothness, "spatial bump sd in cells")
      ->capture_default_str();
  c_syn->add_option("--seed", syn.seed, "generator seed")->capture_default_str();
  c_syn->add_option("--out", syn.out, "STT1 output path")->required();

  ConvertArgs cnv;
  auto* c_cnv = app.add_subcommand("convert", "CSV-long to STT1");
  c_cnv->add_option("--csv", cnv.csv, "date,cell_id,variable,value file")->required();
  c_cnv->add_option("--descriptor", cnv.descriptor, "descriptor JSON")->required();
  c_cnv->add_option("--out", cnv.out, "STT1 output path")->required();

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();  // program name
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help or --version
      std::ostringstream msg;
      app.exit(e, msg, msg);
      out << msg.str();
      return kExitOk;
    }
    err << "stcpd: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*c_dec) return cmd_decompose(dec, out);
    if (*c_cmp) return cmd_compare(cmp, out);
    if (*c_clu) return cmd_cluster(clu, out);
    if (*c_eda) return cmd_eda(eda, out);
    if (*c_syn) return cmd_synth(syn, out);
    if (*c_cnv) return cmd_convert(cnv, out);
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "stcpd: input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericError& e) {
    err << "stcpd: numeric failure";
    if (e.iteration()) err << " at iteration " << *e.iteration();
    err << ": " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    err << "stcpd: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "stcpd: input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "stcpd: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace stcpd::cli
