#include <benchmark/benchmark.h>

#include <random>

#include "firpriv/dp.hpp"
#include "firpriv/estimators.hpp"
#include "firpriv/noise_design.hpp"

using namespace firpriv;

namespace {

SignalSeq gaussian_input(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector r(static_cast<Eigen::Index>(n));
  for (auto& v : r) v = g(rng);
  return SignalSeq(r, SignalKind::input);
}

// LS trace decomposition at N = 200
void BM_DecomposeLs(benchmark::State& state) {
  const auto n_h = static_cast<std::size_t>(state.range(0));
  const RegressorMatrix r = build_regressor(gaussian_input(200, 1), n_h);
  for (auto _ : state) benchmark::DoNotOptimize(decompose_ls_trace(r, 0.1, 5));
}
BENCHMARK(BM_DecomposeLs)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DesignOutputCapped(benchmark::State& state) {
  const RegressorMatrix r = build_regressor(gaussian_input(200, 2), 10);
  const TraceDecomposition d = decompose_ls_trace(r, 0.1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(design_output_capped(d.m, d.c, 0.1, 0.2));
}
BENCHMARK(BM_DesignOutputCapped)->Arg(5)->Arg(20);

void BM_EstimateMRandom(benchmark::State& state) {
  const auto model = RandomInputModel::uniform_gaussian(10, 20, 10, static_cast<std::size_t>(state.range(0)));
  const auto adversary = AdversaryModel::least_squares(9);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_M_random(model, 5, 0.1, adversary, 0, 1));
}
BENCHMARK(BM_EstimateMRandom)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PrivacyAudit(benchmark::State& state) {
  const SignalSeq r = gaussian_input(4, 3);
  const CoefficientBox box(-0.5, 0.5, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(privacy_audit(r, box, 1.0, 1.0, 0.1, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_PrivacyAudit)->Arg(2001)->Arg(20001);

}  // namespace

BENCHMARK_MAIN();
