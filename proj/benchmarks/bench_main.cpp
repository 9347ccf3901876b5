#include <benchmark/benchmark.h>

#include <random>

#include "keymps/metrics.hpp"
#include "keymps/perception.hpp"
#include "keymps/primitives.hpp"
#include "keymps/scenario.hpp"

using namespace keymps;

static void BM_Rollout(benchmark::State& state) {
  const Primitive p = learn_from_demo(builtin_demo("sawing"), {}, 50, "sawing");
  const ScalingParams pair{Vec3(0.1, 0.05, 0.07), Vec3(0.1, 0.12, 0.0)};
  for (auto _ : state) benchmark::DoNotOptimize(rollout(p, pair, 1e-3));
}
BENCHMARK(BM_Rollout)->Unit(benchmark::kMicrosecond);

static void BM_Learn(benchmark::State& state) {
  const Trajectory demo = builtin_demo("sawing");
  for (auto _ : state) benchmark::DoNotOptimize(learn_from_demo(demo, {}, static_cast<int>(state.range(0)), "k"));
}
BENCHMARK(BM_Learn)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_Detect(benchmark::State& state) {
  const GrayImage img = render_fixture(find_scenario(builtin_catalog(), "7"));
  for (auto _ : state) benchmark::DoNotOptimize(detect_object(img));
}
BENCHMARK(BM_Detect)->Unit(benchmark::kMillisecond);

static void BM_Discrepancy(benchmark::State& state) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  Trajectory gt{1e-3, {}}, gen{1e-3, {}};
  for (int i = 0; i < 5000; ++i) gt.points.emplace_back(u(rng), u(rng), u(rng));
  for (int i = 0; i < 8000; ++i) gen.points.emplace_back(u(rng), u(rng), u(rng));
  const auto mode = state.range(0) == 0 ? MatchMode::Greedy : MatchMode::Optimal;
  for (auto _ : state) benchmark::DoNotOptimize(discrepancy(gt, gen, 100, mode));
}
BENCHMARK(BM_Discrepancy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
