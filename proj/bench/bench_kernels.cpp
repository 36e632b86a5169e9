// Serial reference vs OpenMP kernels, plus one full training iteration.

#include <benchmark/benchmark.h>

#include <vector>

#include "tgan/config.hpp"
#include "tgan/harness.hpp"
#include "tgan/kernels.hpp"
#include "tgan/rng.hpp"

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  tgan::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <auto Kernel>
void BM_GemmNN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 64, m = 64;
  const auto a = random_values(n * k, 1);
  const auto b = random_values(k * m, 2);
  std::vector<double> c(n * m);
  for (auto _ : state) {
    Kernel(a, b, c, n, k, m);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * k * m));
}

template <auto Kernel>
void BM_GemmTN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 64, m = 64;
  const auto a = random_values(n * k, 3);
  const auto b = random_values(n * m, 4);
  std::vector<double> c(k * m);
  for (auto _ : state) {
    Kernel(a, b, c, n, k, m);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * k * m));
}

template <auto Kernel>
void BM_NearestCenter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto points = random_values(2 * n, 5);
  const auto centers = random_values(2 * 25, 6);
  std::vector<std::size_t> idx(n);
  std::vector<double> d2(n);
  for (auto _ : state) {
    Kernel(points, centers, idx, d2);
    benchmark::DoNotOptimize(d2.data());
  }
}

void BM_TrainStep(benchmark::State& state) {
  tgan::ExperimentConfig config = tgan::parse_config("");
  config.variant = static_cast<tgan::objectives::GanVariant>(state.range(0));
  config = tgan::parse_config("variant = " + std::string(tgan::objectives::to_string(config.variant)));
  tgan::TrainState s = tgan::init_state(config);
  for (auto _ : state) tgan::train_step(s, config);
}

namespace k = tgan::kernels;

BENCHMARK(BM_GemmNN<k::serial::gemm_nn>)->Arg(64)->Arg(4096);
BENCHMARK(BM_GemmNN<k::omp::gemm_nn>)->Arg(64)->Arg(4096);
BENCHMARK(BM_GemmTN<k::serial::gemm_tn>)->Arg(64)->Arg(4096);
BENCHMARK(BM_GemmTN<k::omp::gemm_tn>)->Arg(64)->Arg(4096);
BENCHMARK(BM_NearestCenter<k::serial::nearest_center>)->Arg(4096)->Arg(10000);
BENCHMARK(BM_NearestCenter<k::omp::nearest_center>)->Arg(4096)->Arg(10000);
BENCHMARK(BM_TrainStep)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();
