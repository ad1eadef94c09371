#include <benchmark/benchmark.h>

#include <random>

#include "detloop/functionals.hpp"
#include "detloop/optimize.hpp"
#include "detloop/polytope.hpp"
#include "detloop/strategy.hpp"

using namespace detloop;

namespace {

std::vector<double> random_params(const StrategySpace& s, std::mt19937_64& rng) {
  std::vector<double> x;
  for (auto [lo, hi] : s.bounds()) x.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
  return x;
}

void BM_BellQubitBehavior(benchmark::State& state) {
  auto s = StrategySpace::bell_qubit();
  std::mt19937_64 rng(1);
  auto x = random_params(s, rng);
  for (auto _ : state) benchmark::DoNotOptimize(s.behavior(x));
}
BENCHMARK(BM_BellQubitBehavior);

void BM_BellQubitBehaviorBorn(benchmark::State& state) {
  auto s = StrategySpace::bell_qubit();
  std::mt19937_64 rng(1);
  auto x = random_params(s, rng);
  for (auto _ : state) benchmark::DoNotOptimize(s.behavior_from_decoded(x));
}
BENCHMARK(BM_BellQubitBehaviorBorn);

void BM_LossyObjective(benchmark::State& state) {
  LossSpec loss;
  loss.model = LossModel::Absorption;
  loss.eta = {0.8, 0.8};
  loss.sink_a = loss.sink_b = 2;
  Functional f = build("cglmp3");
  Objective obj(f, StrategySpace::bell_qutrit(), loss);
  std::mt19937_64 rng(2);
  auto x = random_params(obj.space(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(obj.score(x));
}
BENCHMARK(BM_LossyObjective);

void BM_MaximizeChsh(benchmark::State& state) {
  Functional f = build("chsh");
  OptimizerConfig cfg;
  cfg.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(maximize(f, StrategySpace::bell_qubit(), {}, cfg));
}
BENCHMARK(BM_MaximizeChsh)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FacetEnumeration(benchmark::State& state) {
  auto vs = instrumental_vertices(2, static_cast<int>(state.range(0)), 3, InstrumentalSet::Hybrid);
  for (auto _ : state) benchmark::DoNotOptimize(facet_enumeration(vs));
}
BENCHMARK(BM_FacetEnumeration)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Membership(benchmark::State& state) {
  auto vs = bell_vertices(2, 2, 2, 2);
  std::vector<double> p(16, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(membership(p, vs));
}
BENCHMARK(BM_Membership);

}  // namespace

BENCHMARK_MAIN();
