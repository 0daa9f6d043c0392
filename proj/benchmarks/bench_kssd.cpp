#include <benchmark/benchmark.h>

#include "kssd/chisq.hpp"
#include "kssd/dense_matrix.hpp"
#include "kssd/detector.hpp"
#include "kssd/montecarlo.hpp"
#include "kssd/rng.hpp"
#include "kssd/sampling.hpp"

using namespace kssd;

namespace {

KSModel model_of(std::size_t m, std::size_t n) {
  return KSModel(random_gaussian_subspace(m, n, 1), random_gaussian_subspace(m, n, 2));
}

void BM_ResidualIntersection(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto model = model_of(m, 10);
  const auto y = make_signal(SignalCase::InDperp, model, 3);
  Rng rng(4);
  const auto p = sample_intersection(m, m, m * 3 / 5, m * 3 / 5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(residual_intersection(y, model, p).residual_energy);
}
BENCHMARK(BM_ResidualIntersection)->Arg(40)->Arg(100)->Arg(200);

void BM_ResidualUnion(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto model = model_of(m, 10);
  const auto y = make_signal(SignalCase::InDperp, model, 3);
  Rng rng(5);
  const auto p = sample_union(m, m, m / 2, m / 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(residual_discrete(y, model, p).residual_energy);
}
BENCHMARK(BM_ResidualUnion)->Arg(40)->Arg(100);

void BM_NoncentralChisqCdf(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(noncentral_chisq_cdf(124.3, 100.0, lambda));
}
BENCHMARK(BM_NoncentralChisqCdf)->Arg(1)->Arg(20)->Arg(2000);

void BM_Kron(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = random_gaussian_subspace(m, 10, 6).basis();
  const auto b = random_gaussian_subspace(m, 10, 7).basis();
  for (auto _ : state) benchmark::DoNotOptimize(kron(a, b).rows());
}
BENCHMARK(BM_Kron)->Arg(20)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
