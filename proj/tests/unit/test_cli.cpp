#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "oracles.hpp"
#include "output.hpp"
#include "stcpd/io.hpp"
#include "stcpd/synthetic.hpp"

namespace stcpd {
namespace {

namespace fs = std::filesystem;
using cli::Json;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "stcpd");
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

Json without_timings(Json j) {
  j.erase("timings");
  return j;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("stcpd_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  // Small planted tensor with its descriptor; returns the STT1 path.
  std::string synth(const std::string& name, const std::string& noise, const std::string& seed = "0",
                    const std::string& dims = "60,6,6,3", const std::string& rank = "3") {
    const CliRun r = run_cli({"synth", "--dims", dims, "--rank", rank, "--noise", noise,
                              "--smoothness", "1.0", "--seed", seed, "--out", p(name)});
    EXPECT_EQ(r.code, 0) << r.err;
    return p(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"decompose", "--help"}).code, 0);
  const CliRun v = run_cli({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find('.'), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"decompose", "--rank", "2"}).code, cli::kExitUsage);
  const std::string t = synth("t.stt1", "0.1");
  EXPECT_EQ(run_cli({"decompose", "--tensor", t, "--rank", "0", "--out", p("d")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"decompose", "--tensor", t, "--rank", "2", "--init", "svd", "--out", p("d")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"decompose", "--tensor", t, "--rank", "2", "--weights", "rook", "--out", p("d")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"synth", "--dims", "10,2", "--out", p("x.stt1")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"eda", "--tensor", t, "--season", "monsoon", "--out", p("e")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"eda", "--tensor", t, "--variable", "v9", "--out", p("e")}).code, cli::kExitUsage);
}

TEST_F(CliTest, InputErrors) {
  EXPECT_EQ(run_cli({"decompose", "--tensor", p("missing.stt1"), "--rank", "2", "--out", p("d")}).code,
            cli::kExitInput);
  std::ofstream(p("junk.stt1")) << "not a tensor at all, definitely not STT1";
  const CliRun r = run_cli({"decompose", "--tensor", p("junk.stt1"), "--rank", "2", "--out", p("d")});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find("bad-magic"), std::string::npos) << r.err;
}

TEST_F(CliTest, NumericFailureHasItsOwnExitCode) {
  std::vector<double> v(4 * 4 * 2, 1e300);
  v[3] = -1e300;
  save_binary(p("huge.stt1"), DenseTensor3({4, 4, 2}, v));
  const CliRun r = run_cli({"decompose", "--tensor", p("huge.stt1"), "--rank", "2", "--init", "random",
                            "--out", p("d")});
  EXPECT_EQ(r.code, cli::kExitNumeric) << r.err;
}

TEST_F(CliTest, NoiselessDecomposeReachesTinyError) {
  const std::string t = synth("t.stt1", "0");
  const CliRun r = run_cli({"decompose", "--tensor", t, "--rank", "3", "--init", "stpca", "--out", p("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = read_json(dir_ / "d" / "report.json");
  EXPECT_EQ(Json::parse(r.out), report);
  EXPECT_LT(report["results"]["final_relative_error"].get<double>(), 1e-6);
  EXPECT_EQ(report["command"], "decompose");
  EXPECT_EQ(report["parameters"]["rank"], 3);
  EXPECT_EQ(report["seeds"], Json::array({0}));
  for (const char* f : {"factor_A.csv", "factor_B.csv", "factor_C.csv", "trace.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / "d" / f)) << f;
  }
  const auto a = cli::read_factor_csv(p("d/factor_A.csv"));
  EXPECT_EQ(a.label_header, "date");
  EXPECT_EQ(a.labels.front(), "1979-01-01");
  EXPECT_EQ(a.values.rows(), 60);
  EXPECT_EQ(a.values.cols(), 3);
  const auto c = cli::read_factor_csv(p("d/factor_C.csv"));
  EXPECT_EQ(c.labels, (std::vector<std::string>{"v1", "v2", "v3"}));
  for (Index r2 = 0; r2 < 3; ++r2) EXPECT_NEAR(a.values.col(r2).norm(), 1.0, 1e-12);
}

TEST_F(CliTest, DecomposeDeterministicModuloTimings) {
  const std::string t = synth("t.stt1", "0.1", "4");
  for (const char* init : {"random", "hosvd", "stpca"}) {
    const std::vector<std::string> base{"decompose", "--tensor", t, "--rank", "2", "--init", init,
                                        "--seed", "7", "--out"};
    auto a = base;
    a.push_back(p(std::string("a_") + init));
    auto b = base;
    b.push_back(p(std::string("b_") + init));
    ASSERT_EQ(run_cli(a).code, 0);
    ASSERT_EQ(run_cli(b).code, 0);
    Json ra = without_timings(read_json(dir_ / ("a_" + std::string(init)) / "report.json"));
    Json rb = without_timings(read_json(dir_ / ("b_" + std::string(init)) / "report.json"));
    ra["parameters"].erase("out");
    rb["parameters"].erase("out");
    EXPECT_EQ(ra, rb) << init;
    for (const char* f : {"factor_A.csv", "factor_B.csv", "factor_C.csv", "trace.csv"}) {
      EXPECT_EQ(slurp(dir_ / ("a_" + std::string(init)) / f), slurp(dir_ / ("b_" + std::string(init)) / f));
    }
  }
}

TEST_F(CliTest, SynthSameSeedSameBytes) {
  const std::string a = synth("a.stt1", "0.1", "3");
  const std::string b = synth("b.stt1", "0.1", "3");
  const std::string c = synth("c.stt1", "0.1", "4");
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
  const auto bytes = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  EXPECT_EQ(stt1_crc(bytes(slurp(a))), stt1_crc(bytes(slurp(b))));
  const LoadedTensor in = load_binary(a);
  EXPECT_EQ(in.tensor.dims(), (Dims{60, 36, 3}));
  EXPECT_EQ(in.descriptor.grid.n_rows(), 6);
}

TEST_F(CliTest, SynthTruthReconstructsNoiselessTensor) {
  const std::string t = synth("t.stt1", "0");
  const SyntheticTruth truth = truth_from_json(slurp(t + ".truth.json"));
  const LoadedTensor in = load_binary(t);
  EXPECT_LT(oracle::relative_error(oracle::reconstruct(truth.model), in.tensor), 1e-10);
}

TEST_F(CliTest, ClusterFindsPlantedBlobs) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.05);
  Matrix pts(45, 2);
  std::vector<std::string> labels;
  for (Index i = 0; i < 45; ++i) {
    const double cx[3] = {0.0, 1.0, 0.5};
    const double cy[3] = {0.0, 0.0, 0.9};
    pts(i, 0) = cx[i % 3] + g(rng);
    pts(i, 1) = cy[i % 3] + g(rng);
    labels.push_back(std::to_string(i));
  }
  cli::write_factor_csv(p("factor_B.csv"), "cell_id", labels, pts);
  const CliRun r = run_cli({"cluster", "--factors", dir_.string(), "--mode", "2", "--out", p("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["results"]["best_k"], 3);
  EXPECT_EQ(report["results"]["table"].size(), 11u);
  std::istringstream assign(slurp(dir_ / "c" / "assignments.csv"));
  std::string line;
  std::getline(assign, line);
  EXPECT_EQ(line, "cell_id,cluster,silhouette");
  std::set<std::string> ids;
  while (std::getline(assign, line)) ids.insert(line.substr(line.find(',') + 1, 1));
  EXPECT_EQ(ids, (std::set<std::string>{"1", "2", "3"}));
  const std::string sil = slurp(dir_ / "c" / "silhouette.csv");
  EXPECT_EQ(sil.substr(0, sil.find('\n')), "k,mean_silhouette,inertia");
}

TEST_F(CliTest, ClusterKMaxTooLarge) {
  cli::write_factor_csv(p("f.csv"), "id", {"a", "b", "c", "d"}, Matrix::Random(4, 2));
  EXPECT_EQ(run_cli({"cluster", "--factors", p("f.csv"), "--k-max", "12", "--out", p("c")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"cluster", "--factors", p("f.csv"), "--k-max", "3", "--out", p("c")}).code, 0);
  EXPECT_EQ(run_cli({"cluster", "--factors", p("nothing.csv"), "--out", p("c")}).code, cli::kExitInput);
}

// One variable; each cell shares a common signal with weight decaying in
// grid distance from the centre cell.
std::string decaying_field(const std::string& path) {
  const Index I = 730;
  const GridSpec grid = GridSpec::full(7, 7);
  const Index J = grid.active_count();
  const GridCell ref = grid.cell(J / 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> common(static_cast<std::size_t>(I));
  for (auto& v : common) v = g(rng);
  std::vector<double> v(static_cast<std::size_t>(I * J));
  for (Index j = 0; j < J; ++j) {
    const GridCell c = grid.cell(j);
    const double d2 = static_cast<double>((c.row - ref.row) * (c.row - ref.row) + (c.col - ref.col) * (c.col - ref.col));
    const double share = std::exp(-d2 / 8.0);
    for (Index i = 0; i < I; ++i) {
      v[static_cast<std::size_t>(i + I * j)] = share * common[static_cast<std::size_t>(i)] + (1.0 - share) * g(rng);
    }
  }
  DatasetDescriptor d = DatasetDescriptor::defaults({I, J, 1});
  d.grid = grid;
  d.variables = {"tmax"};
  save_binary(path, DenseTensor3({I, J, 1}, v), &d);
  return path;
}

TEST_F(CliTest, EdaMapsAndAcf) {
  const std::string t = decaying_field(p("field.stt1"));
  const CliRun r = run_cli({"eda", "--tensor", t, "--variable", "tmax", "--out", p("e")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["parameters"]["ref_cell"], 24);
  EXPECT_EQ(report["parameters"]["acf_cell"], 24);
  std::size_t steps = 0;
  for (const auto& s : report["results"]["seasons"]) steps += s["steps"].get<std::size_t>();
  EXPECT_EQ(steps, 730u);
  for (const char* season : {"winter", "spring", "summer", "fall"}) {
    std::istringstream map(slurp(dir_ / "e" / (std::string("map_") + season + ".csv")));
    std::string line;
    std::getline(map, line);
    EXPECT_EQ(line, "cell_id,row,col,value,missing");
    std::vector<double> dist;
    std::vector<double> val;
    while (std::getline(map, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
      ASSERT_EQ(f.size(), 5u);
      ASSERT_EQ(f[4], "0");
      const double row = std::stod(f[1]);
      const double col = std::stod(f[2]);
      if (f[0] == "24") EXPECT_EQ(std::stod(f[3]), 1.0);
      dist.push_back(std::hypot(row - 3.0, col - 3.0));
      val.push_back(std::stod(f[3]));
    }
    EXPECT_EQ(dist.size(), 49u);
    EXPECT_LT(oracle::spearman(dist, val), 0.0) << season;
    const std::string acf = slurp(dir_ / "e" / (std::string("acf_") + season + ".csv"));
    EXPECT_EQ(acf.substr(0, acf.find('\n')), "lag,value,pairs,missing");
  }
}

TEST_F(CliTest, EdaMissingEncodedAsNa) {
  // A constant cell gives a missing map entry.
  const Index I = 120;
  std::vector<double> v(static_cast<std::size_t>(I * 3));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& x : v) x = u(rng);
  for (Index i = 0; i < I; ++i) v[static_cast<std::size_t>(i + 2 * I)] = 5.0;
  save_binary(p("c.stt1"), DenseTensor3({I, 3, 1}, v));
  const CliRun r = run_cli({"eda", "--tensor", p("c.stt1"), "--season", "winter", "--analysis", "map",
                            "--ref-cell", "0", "--out", p("e")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string map = slurp(dir_ / "e" / "map_winter.csv");
  EXPECT_NE(map.find("2,0,2,NA,1"), std::string::npos) << map;
  EXPECT_FALSE(fs::exists(dir_ / "e" / "acf_winter.csv"));
}

TEST_F(CliTest, CompareInitsOrderedAndThreadIndependent) {
  const std::string t = synth("t.stt1", "0.1", "2", "40,5,5,3");
  const std::vector<std::string> base{"compare-inits", "--tensor", t, "--ranks", "2,3", "--seeds", "2",
                                      "--max-iters", "50"};
  auto one = base;
  one.insert(one.end(), {"--threads", "1", "--out", p("one")});
  auto three = base;
  three.insert(three.end(), {"--threads", "3", "--out", p("three")});
  const CliRun a = run_cli(one);
  const CliRun b = run_cli(three);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  Json ja = without_timings(Json::parse(a.out));
  Json jb = without_timings(Json::parse(b.out));
  ja["parameters"].erase("threads");
  jb["parameters"].erase("threads");
  ja["parameters"].erase("out");
  jb["parameters"].erase("out");
  EXPECT_EQ(ja, jb);
  const auto& runs = ja["results"]["runs"];
  ASSERT_EQ(runs.size(), 12u);
  EXPECT_EQ(runs[0]["initializer"], "random");
  EXPECT_EQ(runs[0]["rank"], 2);
  EXPECT_EQ(runs[1]["seed"], 1);
  EXPECT_EQ(runs[11]["initializer"], "stpca");
  EXPECT_EQ(runs[11]["rank"], 3);
  // Headline cell is the best of the seeds.
  for (const auto& cell : ja["results"]["cells"]) {
    double best = 1e300;
    for (const auto& run : runs) {
      if (run["initializer"] == cell["initializer"] && run["rank"] == cell["rank"]) {
        best = std::min(best, run["final_relative_error"].get<double>());
      }
    }
    EXPECT_EQ(cell["best_relative_error"].get<double>(), best);
    EXPECT_EQ(ja["results"]["table"][cell["initializer"].get<std::string>()]
                [std::to_string(cell["rank"].get<int>())],
              best);
  }
  const std::string table = slurp(dir_ / "one" / "table.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "initializer,rank_2,rank_3");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

TEST_F(CliTest, ConvertCsvToStt1) {
  DatasetDescriptor d = DatasetDescriptor::defaults({3, 2, 2});
  d.variables = {"prec", "tmin"};
  const auto t = oracle::random_tensor({3, 2, 2}, 6);
  save_csv_long(p("t.csv"), t, d);
  std::ofstream(p("d.json")) << descriptor_to_json(d);
  const CliRun r = run_cli({"convert", "--csv", p("t.csv"), "--descriptor", p("d.json"), "--out", p("t.stt1")});
  ASSERT_EQ(r.code, 0) << r.err;
  const LoadedTensor in = load_binary(p("t.stt1"));
  EXPECT_EQ(in.descriptor.variables, d.variables);
  for (Index n = 0; n < t.size(); ++n) {
    EXPECT_EQ(in.tensor.values()[static_cast<std::size_t>(n)], t.values()[static_cast<std::size_t>(n)]);
  }
}

TEST_F(CliTest, GridOverride) {
  const std::string t = synth("t.stt1", "0.1");
  save_grid(p("g.json"), GridSpec::full(4, 9));
  EXPECT_EQ(run_cli({"decompose", "--tensor", t, "--rank", "2", "--grid", p("g.json"), "--out", p("d")}).code, 0);
  save_grid(p("bad.json"), GridSpec::full(5, 5));
  EXPECT_EQ(run_cli({"decompose", "--tensor", t, "--rank", "2", "--grid", p("bad.json"), "--out", p("d")}).code,
            cli::kExitUsage);
}

#ifdef STCPD_CLI_PATH
int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = STCPD_CLI_PATH;
  EXPECT_EQ(shell(bin + " --help"), 0);
  EXPECT_EQ(shell(bin + " synth --dims 30,3,3,2 --rank 2 --out " + p("s.stt1")), 0);
  EXPECT_EQ(shell(bin + " decompose --tensor " + p("s.stt1") + " --rank 0 --out " + p("d")), 2);
  EXPECT_EQ(shell(bin + " decompose --tensor " + p("none.stt1") + " --rank 2 --out " + p("d")), 3);
  std::vector<double> v(4 * 4 * 2, 1e300);
  v[3] = -1e300;
  save_binary(p("huge.stt1"), DenseTensor3({4, 4, 2}, v));
  EXPECT_EQ(shell(bin + " decompose --tensor " + p("huge.stt1") + " --rank 2 --init random --out " + p("d")), 4);
  EXPECT_EQ(shell(bin + " decompose --tensor " + p("s.stt1") + " --rank 2 --out " + p("d")), 0);
}
#endif

}  // namespace
}  // namespace stcpd
