#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "motionkit/delaunay.hpp"
#include "motionkit/kinematics.hpp"
#include "motionkit/retarget.hpp"
#include "motionkit/smoothing.hpp"
#include "motionkit/synthetic.hpp"

using namespace motionkit;

static Points cloud(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Points p(n);
  for (auto& x : p) x = Vec3(u(rng), u(rng), u(rng));
  return p;
}

static void BM_Delaunay(benchmark::State& state) {
  const Points pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(delaunay3d(pts).tets.size());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Delaunay)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_FkJacobian(benchmark::State& state) {
  const Skeleton s = synthetic::humanoid();
  const ShapeParams shape = ShapeParams::ones(s.size());
  const auto scene = synthetic::held_box_scene(2, false);
  const Pose pose = Pose::from_frame(scene.agent_a.frames[1]);
  for (auto _ : state) benchmark::DoNotOptimize(fk_jacobian(s, shape, pose).data());
}
BENCHMARK(BM_FkJacobian);

static void BM_SmoothRoot(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.01);
  Trajectory t(state.range(0), 3);
  for (Eigen::Index i = 0; i < t.rows(); ++i) t.row(i) << 0.01 * i + g(rng), g(rng), 0.9 + g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(smooth_root(t, 10.0).data());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmoothRoot)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

static void BM_RetargetFrames(benchmark::State& state) {
  const auto scene = synthetic::held_box_scene(static_cast<std::size_t>(state.range(0)), state.range(1) != 0);
  RetargetProblem p;
  p.source_skeleton = &scene.skeleton;
  p.source_shape = ShapeParams::ones(scene.skeleton.size());
  p.target_skeleton = &scene.skeleton;
  p.target_shape = p.source_shape;
  for (double& x : p.target_shape.bone_scales) x = 1.2;
  p.source = &scene.agent_a;
  p.second_source = scene.agent_b ? &*scene.agent_b : nullptr;
  p.object = &scene.object;
  const RetargetConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(retarget_sequence(p, cfg).total_iterations);
  state.counters["frames/s"] = benchmark::Counter(static_cast<double>(state.range(0) * state.iterations()),
                                                  benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RetargetFrames)->Args({10, 0})->Args({10, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
