#include <benchmark/benchmark.h>

#include <random>

#include "stcpd/als.hpp"
#include "stcpd/clustering.hpp"
#include "stcpd/spatial_weights.hpp"
#include "stcpd/stpca.hpp"
#include "stcpd/synthetic.hpp"
#include "stcpd/tensor.hpp"

namespace {

using namespace stcpd;

const SyntheticData& planted() {
  static const SyntheticData d = generate_synthetic({});
  return d;
}

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  }
  return m;
}

void BM_KhatriRao(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix a = random_matrix(n, 3, 1);
  const Matrix b = random_matrix(n, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(khatri_rao(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * 3);
}
BENCHMARK(BM_KhatriRao)->Arg(32)->Arg(144)->Arg(365);

// One ALS sweep on the default planted benchmark (365 x 144 x 3).
void BM_AlsSweep(benchmark::State& state) {
  const auto& d = planted();
  AlsOptions o;
  o.rank = state.range(0);
  o.max_iters = 1;
  const Factors start = init_random(d.tensor.dims(), o.rank, 0);
  for (auto _ : state) benchmark::DoNotOptimize(cp_als_from(d.tensor, start, o));
}
BENCHMARK(BM_AlsSweep)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_StpcaInit(benchmark::State& state) {
  const auto& d = planted();
  for (auto _ : state) benchmark::DoNotOptimize(stpca_to_cp_init(d.tensor, d.grid, state.range(0)));
}
BENCHMARK(BM_StpcaInit)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_HosvdInit(benchmark::State& state) {
  const auto& d = planted();
  for (auto _ : state) benchmark::DoNotOptimize(init_hosvd(d.tensor, 3));
}
BENCHMARK(BM_HosvdInit)->Unit(benchmark::kMillisecond);

void BM_FullAls(benchmark::State& state) {
  const auto& d = planted();
  AlsOptions o;
  o.rank = 3;
  if (state.range(0) == 1) o.initializer = StpcaInitializer{d.grid, {}};
  for (auto _ : state) benchmark::DoNotOptimize(cp_als(d.tensor, o));
}
BENCHMARK(BM_FullAls)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Silhouette(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix p = random_matrix(n, 2, 3);
  std::vector<Index> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 4;
  for (auto _ : state) benchmark::DoNotOptimize(silhouette(p, labels));
}
BENCHMARK(BM_Silhouette)->Arg(144)->Arg(1054);

void BM_SweepK(benchmark::State& state) {
  const Matrix p = random_matrix(state.range(0), 2, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_k(p, 2, 12, 0));
}
BENCHMARK(BM_SweepK)->Arg(144)->Arg(365)->Unit(benchmark::kMillisecond);

void BM_MoransIndex(benchmark::State& state) {
  const GridSpec g = GridSpec::full(31, 34);
  const SpatialWeights w = build_grid_weights(g, WeightScheme::queen());
  const Vector x = random_matrix(g.active_count(), 1, 5).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(morans_index(x, w));
}
BENCHMARK(BM_MoransIndex);

}  // namespace

BENCHMARK_MAIN();
