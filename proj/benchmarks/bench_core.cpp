#include <benchmark/benchmark.h>

#include "skellam/analytics.hpp"
#include "skellam/samplers.hpp"
#include "skellam/specfun.hpp"

using namespace skellam;

namespace {

ProcessSpec gompertz_spec(long k) {
  ProcessSpec s;
  s.variant = Variant::NGSP;
  s.k = k;
  for (long j = 0; j < k; ++j) {
    s.up.push_back(RateFunction::gompertz_makeham(0.6, 0.1, 5.0 + j));
    s.down.push_back(RateFunction::gompertz_makeham(0.5, 0.2, 4.0 + j));
  }
  return s;
}

}  // namespace

static void BM_PmfConvolution(benchmark::State& state) {
  const ProcessSpec spec = gompertz_spec(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ngsp_pmf_convolution(spec, 2.0, -40, 40));
}
BENCHMARK(BM_PmfConvolution)->Arg(1)->Arg(3)->Arg(8);

static void BM_PmfBessel(benchmark::State& state) {
  const ProcessSpec spec = gompertz_spec(1);
  for (auto _ : state) benchmark::DoNotOptimize(ngsp_pmf_bessel(spec, 2.0, -40, 40));
}
BENCHMARK(BM_PmfBessel);

static void BM_MittagLeffler(benchmark::State& state) {
  const double z = -static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(mittag_leffler(0.7, 1.0, z));
}
// series, extended-precision fallback, asymptotic tail
BENCHMARK(BM_MittagLeffler)->Arg(5)->Arg(50)->Arg(600);

static void BM_NgspPath(benchmark::State& state) {
  const ProcessSpec spec = gompertz_spec(3);
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng(1, i++);
    benchmark::DoNotOptimize(sample_ngsp(spec, 20.0, rng));
  }
}
BENCHMARK(BM_NgspPath);

static void BM_InverseSubordinator(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng(2, i++);
    benchmark::DoNotOptimize(sample_inverse_subordinator(0.7, 1.0, 1.0 / 512, rng));
  }
}
BENCHMARK(BM_InverseSubordinator);

BENCHMARK_MAIN();
