// Microbenchmarks for the hot paths: quadrature, moment evaluation, the
// thinning sampler, and per-realization statistic kernels.  The paired
// replication benchmark approximates the cost of one Monte Carlo draw in
// the power-loss experiments.

#include <benchmark/benchmark.h>

#include <cmath>

#include "poissonht/inference.hpp"
#include "poissonht/intensity.hpp"
#include "poissonht/moments.hpp"
#include "poissonht/quadrature.hpp"
#include "poissonht/rng.hpp"
#include "poissonht/sampler.hpp"

namespace {

using namespace poissonht;

IntensityModel amplitude_model(double n) {
  return IntensityModel::amplitude(1.0, n, 0.5,
                                   BaseSignal::offset_cosine(2.0, 1.0, 1.0));
}

void BM_quadrature_oscillatory(benchmark::State& state) {
  const double length = static_cast<double>(state.range(0));
  for (auto _ : state) {
    double v = integrate([](double x) { return std::sin(x) * std::sin(x); },
                         0.0, length);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_quadrature_oscillatory)->Arg(10)->Arg(100);

void BM_moment_fast_path(benchmark::State& state) {
  const IntensityModel m = amplitude_model(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    double v = moment_I(m, 1, 2, 0, 0);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_moment_fast_path)->Arg(100)->Arg(10000);

void BM_moment_full_domain(benchmark::State& state) {
  const IntensityModel m = amplitude_model(static_cast<double>(state.range(0)));
  MomentOptions opts;
  opts.periodic_fast_path = false;
  for (auto _ : state) {
    double v = moment_I(m, 1, 2, 0, 0, opts);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_moment_full_domain)->Arg(100);

void BM_sampler(benchmark::State& state) {
  const IntensityModel m = amplitude_model(static_cast<double>(state.range(0)));
  std::uint64_t rep = 0;
  for (auto _ : state) {
    Realization r = sample(m, m.theta0(), SeedSpec{12345, rep++});
    benchmark::DoNotOptimize(r.points.data());
    state.counters["points"] = static_cast<double>(r.points.size());
  }
}
BENCHMARK(BM_sampler)->Arg(100)->Arg(400);

void BM_score_kernel(benchmark::State& state) {
  const IntensityModel m = amplitude_model(100.0);
  const ScoreKernel score(m);
  const Realization r = sample(m, m.theta0(), SeedSpec{12345, 0});
  for (auto _ : state) {
    double v = score(r);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_score_kernel);

void BM_paired_replication(benchmark::State& state) {
  const IntensityModel m = amplitude_model(100.0);
  const ScoreKernel score(m);
  const LikelihoodRatioKernel lr(m, 1.0);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    Realization r = sample(m, m.theta0(), SeedSpec{999, rep++});
    double d = score(r);
    double l = lr(r);
    benchmark::DoNotOptimize(d);
    benchmark::DoNotOptimize(l);
  }
}
BENCHMARK(BM_paired_replication);

}  // namespace

BENCHMARK_MAIN();
