#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "dloknot/curve.hpp"
#include "dloknot/move_planner.hpp"
#include "dloknot/rope_sim.hpp"
#include "dloknot/topology.hpp"

using namespace dloknot;

namespace {

Curve random_curve(std::size_t M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < M; ++i) pts.emplace_back(u(rng), u(rng), 0.2 * u(rng));
  return Curve::from_polyline(pts);
}

void BM_Geodesic(benchmark::State& state) {
  const auto c = random_curve(static_cast<std::size_t>(state.range(0)), 1);
  double a = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geodesic(c, a, 0.9));
    a = a < 0.5 ? a + 0.001 : 0.1;
  }
}
BENCHMARK(BM_Geodesic)->Arg(30)->Arg(60);

void BM_Crossings(benchmark::State& state) {
  const auto c = random_curve(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(project_and_find_crossings(c));
}
BENCHMARK(BM_Crossings)->Arg(30)->Arg(60)->Arg(200);

void BM_IsOverhand(benchmark::State& state) {
  const auto d = project_and_find_crossings(random_curve(static_cast<std::size_t>(state.range(0)), 3));
  state.counters["crossings"] = static_cast<double>(d.size());
  for (auto _ : state) benchmark::DoNotOptimize(is_overhand(d));
}
BENCHMARK(BM_IsOverhand)->Arg(12)->Arg(30);

void BM_PlanRI(benchmark::State& state) {
  const SimConfig sim;
  const PlannerParams params;
  const auto c = true_curve(init_symmetric_arc(sim, std::numbers::pi), params.M, sim.rope_length);
  for (auto _ : state) benchmark::DoNotOptimize(plan_RI(c, params));
}
BENCHMARK(BM_PlanRI);

void BM_SimStep(benchmark::State& state) {
  SimConfig sim;
  sim.self_collision = static_cast<SelfCollisionMode>(state.range(0));
  auto s = init_symmetric_arc(sim, 2.5);
  for (auto& p : s.positions) p.z() += 0.05;
  for (auto _ : state) step_in_place(s, sim);
  state.SetLabel(to_string(sim.self_collision));
}
BENCHMARK(BM_SimStep)
    ->Arg(static_cast<int>(SelfCollisionMode::kNone))
    ->Arg(static_cast<int>(SelfCollisionMode::kNodePair))
    ->Arg(static_cast<int>(SelfCollisionMode::kCapsule));

}  // namespace
BENCHMARK_MAIN();
