// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "motionkit/delaunay.hpp"
#include "motionkit/filter.hpp"
#include "motionkit/interactmesh.hpp"
#include "motionkit/kinematics.hpp"
#include "motionkit/pipeline.hpp"
#include "motionkit/retarget.hpp"
#include "motionkit/rewards.hpp"
#include "motionkit/schedule.hpp"
#include "motionkit/smoothing.hpp"
#include "motionkit/synthetic.hpp"
#include "oracles.hpp"

using namespace motionkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RetargetProblem problem_for(const synthetic::HeldBoxScene& scene, double target_scale) {
  RetargetProblem p;
  p.source_skeleton = &scene.skeleton;
  p.source_shape = ShapeParams::ones(scene.skeleton.size());
  p.target_skeleton = &scene.skeleton;
  p.target_shape = p.source_shape;
  for (std::size_t j = 1; j < p.target_shape.bone_scales.size(); ++j) p.target_shape.bone_scales[j] = target_scale;
  p.source = &scene.agent_a;
  p.second_source = scene.agent_b ? &*scene.agent_b : nullptr;
  p.object = &scene.object;
  return p;
}

Outcome identity_retargeting() {
  const auto scene = synthetic::held_box_scene(100, false);
  const auto start = std::chrono::steady_clock::now();
  const RetargetResult r = retarget_sequence(problem_for(scene, 1.0), RetargetConfig{});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const ShapeParams ones = ShapeParams::ones(scene.skeleton.size());
  const auto in = sequence_positions(scene.skeleton, ones, scene.agent_a);
  const auto out = sequence_positions(scene.skeleton, ones, r.sequence);
  double worst = 0.0;
  for (std::size_t t = 0; t < in.size(); ++t)
    for (std::size_t j = 0; j < in[t].size(); ++j) worst = std::max(worst, (in[t][j] - out[t][j]).norm());
  return {scene.skeleton.size() == 20 && worst < 1e-3 && seconds < 60.0,
          "max deviation " + fmt(worst) + " m, " + fmt(seconds) + " s"};
}

Outcome laplacian_algebra() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double translation = 0.0, rotation = 0.0, row_sum = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Matrix<double, 4, 3> p;
    for (int r = 0; r < 4; ++r) p.row(r) << u(rng), u(rng), u(rng);
    const Laplacian l = laplacian(p);
    const Eigen::RowVector3d c = 1000.0 * Eigen::RowVector3d(u(rng), u(rng), u(rng));
    const Eigen::Matrix<double, 4, 3> moved = p.rowwise() + c;
    translation = std::max(translation, (laplacian(moved) - l).cwiseAbs().maxCoeff());
    const Mat3 rot = Quat(Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).normalized()).toRotationMatrix();
    const Eigen::Matrix<double, 4, 3> turned = p * rot.transpose();
    rotation = std::max(rotation, (laplacian(turned) - l * rot.transpose()).cwiseAbs().maxCoeff());
    row_sum = std::max(row_sum, l.colwise().sum().cwiseAbs().maxCoeff());
  }
  return {translation < 1e-12 && rotation < 1e-9 && row_sum < 1e-9,
          "translation " + fmt(translation) + ", rotation " + fmt(rotation) + ", row sum " + fmt(row_sum)};
}

Outcome delaunay_correctness() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(8, 20);
  int violations = 0;
  double worst_volume = 0.0;
  int hull_checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Points pts = oracle::random_points(rng, static_cast<std::size_t>(count(rng)));
    const Tetrahedralization tri = delaunay3d(pts);
    double total = 0.0;
    for (const Tet& t : tri.tets) {
      Vec3 center;
      double r2 = 0.0;
      if (!oracle::circumsphere(pts[t[0]], pts[t[1]], pts[t[2]], pts[t[3]], center, r2)) {
        ++violations;
        continue;
      }
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i == t[0] || i == t[1] || i == t[2] || i == t[3]) continue;
        if (oracle::strictly_inside(center, r2, pts[i], 1e-9)) ++violations;
      }
      total += oracle::tet_volume(pts[t[0]], pts[t[1]], pts[t[2]], pts[t[3]]);
    }
    if (pts.size() <= 12) {
      const double hull = oracle::hull_volume(pts);
      worst_volume = std::max(worst_volume, std::abs(total - hull) / hull);
      ++hull_checks;
    }
  }
  return {violations == 0 && worst_volume < 1e-6 && hull_checks > 0,
          std::to_string(violations) + " empty-sphere violations, worst volume error " + fmt(worst_volume) + " over " +
              std::to_string(hull_checks) + " hull checks"};
}

Skeleton four_joint_skeleton() {
  Skeleton s = synthetic::chain(4);
  s.joints[2].rest_offset = Vec3(0.3, 0.8, -0.2);
  s.joints[3].rest_offset = Vec3(-0.5, 0.1, 0.6);
  for (auto& j : s.joints) {
    j.q_min = Vec3::Constant(-1.0);
    j.q_max = Vec3::Constant(1.0);
    j.v_min = -6.0;
    j.v_max = 6.0;
  }
  s.foot_joints = {3};
  return s;
}

double kink_distance(const Skeleton& s, const Pose& q, const Pose& prev, double dt) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < s.size(); ++j) {
    for (int ax = 0; ax < 3; ++ax) {
      const double x = q.joint_rots[j - 1][ax];
      const double step = x - prev.joint_rots[j - 1][ax];
      d = std::min({d, std::abs(x - s.joints[j].q_min[ax]), std::abs(x - s.joints[j].q_max[ax]),
                    std::abs(step - s.joints[j].v_min * dt), std::abs(step - s.joints[j].v_max * dt)});
    }
  }
  return d;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Objective gradient and FK Jacobian against central differences on one
// skeleton; returns the worst relative error.
double gradient_error(const Skeleton& skel, std::mt19937_64& rng) {
  const std::size_t n = skel.size();
  const ShapeParams shape = ShapeParams::ones(n);
  const Points object{Vec3(0.2, 0.5, 0.1), Vec3(-0.3, 0.9, 0.4), Vec3(0.1, 1.4, -0.3), Vec3(0.4, 1.1, 0.6)};
  double worst = 0.0;
  int checked = 0;
  while (checked < 10) {
    const Pose src = oracle::random_pose(rng, n, 0.8), src_prev = oracle::random_pose(rng, n, 0.8);
    const Pose prev = oracle::random_pose(rng, n, 0.8), q = oracle::random_pose(rng, n, 1.2);
    if (kink_distance(skel, q, prev, 0.1) < 1e-4) continue;
    RetargetConfig cfg;
    cfg.mesh.rule = RetentionRule::Loose;
    cfg.mesh.proximity_gate.reset();
    const InteractMesh mesh = build_interact_mesh(fk(skel, shape, src), {}, object, cfg.mesh);
    FrameContext ctx;
    ctx.skeleton = &skel;
    ctx.shape = &shape;
    ctx.dt = 0.1;
    ctx.mesh = &mesh;
    ctx.object_vertices = &object;
    AgentFrameContext ac;
    ac.source = src;
    ac.previous = prev;
    ac.source_previous = src_prev;
    ac.previous_positions = fk(skel, shape, prev);
    ac.planted_feet = skel.foot_joints;
    ctx.agents.push_back(ac);

    const Eigen::VectorXd x = pack_pose(q);
    const Eigen::VectorXd g = objective_gradient(std::vector<Pose>{q}, ctx, cfg);
    const Eigen::VectorXd fd = oracle::numeric_gradient(
        [&](const Eigen::VectorXd& y) { return eval_objective(std::vector<Pose>{unpack_pose(y, n)}, ctx, cfg).total; },
        x);
    worst = std::max(worst, relative_error(g, fd));

    const Eigen::MatrixXd jac = fk_jacobian(skel, shape, q);
    const Eigen::MatrixXd jfd = oracle::numeric_jacobian(
        [&](const Eigen::VectorXd& y) {
          const JointPositions p = fk(skel, shape, unpack_pose(y, n));
          Eigen::VectorXd out(3 * static_cast<Eigen::Index>(n));
          for (std::size_t j = 0; j < n; ++j) out.segment<3>(3 * static_cast<Eigen::Index>(j)) = p[j];
          return out;
        },
        x);
    worst = std::max(worst, relative_error(jac, jfd));
    ++checked;
  }
  return worst;
}

Outcome gradient_fidelity() {
  std::mt19937_64 rng(4);
  const double chain = gradient_error(four_joint_skeleton(), rng);
  const double humanoid = gradient_error(synthetic::humanoid(), rng);
  return {chain < 1e-4 && humanoid < 1e-4,
          "worst relative error " + fmt(chain) + " (4-joint), " + fmt(humanoid) + " (humanoid)"};
}

Outcome sobolev_smoother() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.02);
  bool ok = true;
  std::string detail;
  Trajectory walk(80, 3);
  for (Eigen::Index i = 0; i < walk.rows(); ++i) walk.row(i) << 0.03 * i + noise(rng), noise(rng), 0.9 + noise(rng);
  if (smooth_root(walk, 0.0) != walk) {
    ok = false;
    detail += "alpha 0 not exact; ";
  }
  const Trajectory constant = Trajectory::Constant(50, 3, 0.7);
  double fixed = 0.0;
  for (double alpha : {0.1, 1.0, 10.0, 100.0})
    fixed = std::max(fixed, (smooth_root(constant, alpha) - constant).cwiseAbs().maxCoeff());
  ok = ok && fixed < 1e-12;
  int energy_failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory jitter(40, 3);
    for (Eigen::Index i = 0; i < jitter.rows(); ++i)
      jitter.row(i) << std::sin(0.1 * i) + noise(rng), 0.02 * i + noise(rng), noise(rng);
    const Eigen::Vector3d before = second_difference_energy(jitter);
    for (double alpha : {0.1, 1.0, 10.0, 100.0}) {
      const Eigen::Vector3d after = second_difference_energy(smooth_root(jitter, alpha));
      if ((after.array() > before.array()).any()) ++energy_failures;
    }
  }
  ok = ok && energy_failures == 0;
  Trajectory spike = Trajectory::Zero(3, 3);
  spike(1, 0) = 1.0;
  const Trajectory s = smooth_root(spike, 1.0);
  const double hand = std::max({std::abs(s(0, 0) - 2.0 / 7.0), std::abs(s(1, 0) - 3.0 / 7.0),
                                std::abs(s(2, 0) - 2.0 / 7.0)});
  ok = ok && hand < 1e-10;
  detail += "fixed point " + fmt(fixed) + ", energy increases " + std::to_string(energy_failures) +
            ", 3-point error " + fmt(hand);
  return {ok, detail};
}

Outcome contact_zones() {
  const int a = contact_label(0.05), b = contact_label(0.10), c = contact_label(0.25);
  return {a == 1 && b == 0 && c == -1,
          "labels " + std::to_string(a) + "/" + std::to_string(b) + "/" + std::to_string(c)};
}

ObservationFrame zero_observation(std::size_t joints) {
  ObservationFrame o;
  o.agent.p.assign(joints, Vec3::Zero());
  o.agent.q.assign(joints, Vec3::Zero());
  o.agent.p_dot.assign(joints, Vec3::Zero());
  o.agent.q_dot.assign(joints, Vec3::Zero());
  o.agent.c.assign(joints, 0);
  for (auto& d : o.deltas) d = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(joints));
  return o;
}

Outcome reward_bounds() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> label(-1, 1), bit(0, 1);
  const std::size_t joints = 20;
  int out_of_bounds = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    ObservationFrame o = zero_observation(joints);
    std::vector<int> ref(joints);
    for (auto& d : o.deltas)
      for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = 0.1 * (u(rng) - 0.5);
    for (std::size_t j = 0; j < joints; ++j) {
      o.agent.q_dot[j] = 0.2 * Vec3(u(rng), u(rng), u(rng));
      o.agent.c[j] = bit(rng);
      ref[j] = label(rng);
    }
    RewardConfig cfg;
    cfg.lambda_delta = u(rng);
    cfg.lambda_c = u(rng);
    cfg.lambda_v = u(rng);
    cfg.lambda_f = 0.1 * u(rng);
    for (double& w : cfg.omega) w = u(rng);
    const double r = compute_reward(o, ref, std::vector<double>{5.0 * u(rng), 5.0 * u(rng)}, cfg).value;
    if (!(r > 0.0 && r <= 1.0)) ++out_of_bounds;
  }

  // grid over each penalty with everything else held at a mid value
  int not_decreasing = 0;
  const RewardConfig cfg;
  for (int which = 0; which < 4; ++which) {
    double last = 2.0;
    for (int step = 0; step < 10; ++step) {
      ObservationFrame o = zero_observation(joints);
      std::vector<int> ref(joints, 0);
      std::vector<double> forces{1.0};
      const double level = 0.1 * step;
      switch (which) {
        case 0: o.deltas[static_cast<std::size_t>(DeltaComponent::ObjPos)][0] = level; break;
        case 1: std::fill(ref.begin(), ref.begin() + step, 1); break;
        case 2: o.agent.q_dot[3] = Vec3(level, 0.0, 0.0); break;
        default: forces.push_back(1.0 + level); break;
      }
      const double r = compute_reward(o, ref, forces, cfg).value;
      if (step > 0 && !(r < last)) ++not_decreasing;
      last = r;
    }
  }
  const ObservationFrame perfect = zero_observation(joints);
  const double one = compute_reward(perfect, std::vector<int>(joints, 0), {}, cfg).value;
  return {out_of_bounds == 0 && not_decreasing == 0 && one == 1.0,
          std::to_string(out_of_bounds) + " out of (0, 1], " + std::to_string(not_decreasing) +
              " non-decreasing grid steps, perfect tracking R = " + fmt(one)};
}

Outcome schedule_formulas() {
  ScheduleConfig c;
  c.kappa = 5;
  c.epsilon = 10;
  c.t_imit = 10;
  const double ts[] = {0, 5, 10, 15, 16};
  const double expected[] = {1, 1, 0.5, 0, 0};
  bool ok = true;
  for (int i = 0; i < 5; ++i) ok = ok && dagger_gate(ts[i], c) == expected[i];
  bool sweep = true;
  for (int t = 0; t <= 1000; ++t) sweep = sweep && loss_weight(t, c) == dagger_gate(t, c);
  const bool flip = reward_mode(9, c) == RewardMode::Imitation && reward_mode(10, c) == RewardMode::Trajectory;
  return {ok && sweep && flip, std::string("gate points ") + (ok ? "exact" : "wrong") + ", sweep " +
                                   (sweep ? "equal" : "differs") + ", mode flip " + (flip ? "at t_imit" : "wrong")};
}

Outcome schedule_simulator() {
  ScheduleConfig c;
  c.kappa = 2;
  c.epsilon = 2;
  c.horizon = 10;
  c.rounds = 6;
  c.seed = 11;
  const ScheduleLog log = run_schedule(point_mass_stubs(), c);
  const double expected[] = {1, 1, 1, 0.5, 0, 0};
  bool gates = log.rounds.size() == 6;
  for (std::size_t t = 0; gates && t < 6; ++t) gates = log.rounds[t].gate == expected[t];
  const ScheduleLog again = run_schedule(point_mass_stubs(), c);
  const bool identical =
      again.rounds_csv() == log.rounds_csv() && again.transitions_jsonl() == log.transitions_jsonl();
  c.horizon = 10000;
  const ScheduleLog big = run_schedule(point_mass_stubs(), c);
  const double fraction = big.rounds[3].teacher_fraction;
  return {gates && identical && std::abs(fraction - 0.5) <= 0.02,
          std::string("gates ") + (gates ? "match" : "differ") + ", teacher fraction at gate 0.5 = " + fmt(fraction) +
              ", reruns " + (identical ? "identical" : "differ")};
}

Outcome train_to_filter() {
  std::vector<Clip> three{{"a", {10}}, {"b", {10}}, {"c", {100}}};
  const FilterState s = filter_until_converged(FilterState::from_clips(three));
  const bool example = s.retained_ids() == std::vector<std::string>{"c"} &&
                       s.sigma_trace == std::vector<double>{40, 100};
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(1.0, 500.0);
  std::uniform_int_distribution<int> count(1, 60);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Clip> clips;
    std::map<std::string, std::vector<double>> as_map;
    for (int i = count(rng); i > 0; --i) {
      Clip c{"clip" + std::to_string(i), {std::round(u(rng)), std::round(u(rng))}};
      as_map[c.id] = c.episode_lengths;
      clips.push_back(std::move(c));
    }
    const std::size_t n = clips.size();
    const FilterState out = filter_until_converged(FilterState::from_clips(std::move(clips)));
    const oracle::FilterOutcome o = oracle::repeated_mean_filter(as_map);
    std::vector<std::string> kept = out.retained_ids();
    std::sort(kept.begin(), kept.end());
    bool ok = kept == o.survivors && static_cast<std::size_t>(out.iteration) <= n &&
              std::is_sorted(out.sigma_trace.begin(), out.sigma_trace.end()) &&
              out.sigma_trace.size() == o.sigmas.size();
    for (std::size_t k = 0; ok && k < o.sigmas.size(); ++k)
      ok = std::abs(out.sigma_trace[k] - o.sigmas[k]) <= 1e-9 * o.sigmas[k];
    if (!ok) ++failures;
  }
  return {example && failures == 0, std::string("{10,10,100} ") + (example ? "-> {100}, trace [40,100]" : "wrong") +
                                        ", " + std::to_string(failures) + " of 100 random corpora disagree"};
}

struct Residuals {
  double optimized = 0.0;
  double copied = 0.0;
  std::size_t tets = 0;
};

Residuals scaled_residuals(const synthetic::HeldBoxScene& scene, const RetargetConfig& cfg) {
  const RetargetProblem p = problem_for(scene, 1.2);
  const RetargetResult r = retarget_sequence(p, cfg);
  const SceneFrames frames = prepare_scene(p, cfg);
  const Skeleton& s = scene.skeleton;
  const bool two = scene.agent_b.has_value();
  const auto opt_b = two ? sequence_positions(s, p.target_shape, *r.second_sequence) : std::vector<JointPositions>{};
  const auto copy_b = two ? sequence_positions(s, p.target_shape, *scene.agent_b) : std::vector<JointPositions>{};
  Residuals out;
  for (const InteractMesh& m : frames.meshes) out.tets += m.tetrahedra.size();
  if (out.tets == 0) return out;
  out.optimized = mean_laplacian_residual(frames, sequence_positions(s, p.target_shape, r.sequence), opt_b);
  out.copied = mean_laplacian_residual(frames, sequence_positions(s, p.target_shape, scene.agent_a), copy_b);
  return out;
}

// Corpus: a one-agent and a two-agent carry, both retargeted onto a body with
// every bone 1.2x longer. The pooled mean runs over every tetrahedron of the
// corpus under the default configuration; the two-agent scene is checked on
// its own as well with the proximity gate off, since the default gate leaves
// its meshes (almost) empty.
Outcome laplacian_fidelity() {
  const auto solo = synthetic::held_box_scene(60, false);
  const auto duo = synthetic::held_box_scene(60, true);
  const Residuals a = scaled_residuals(solo, RetargetConfig{});
  const Residuals b = scaled_residuals(duo, RetargetConfig{});
  const double n = static_cast<double>(a.tets + b.tets);
  const double pooled_opt = (a.optimized * static_cast<double>(a.tets) + b.optimized * static_cast<double>(b.tets)) / n;
  const double pooled_copy = (a.copied * static_cast<double>(a.tets) + b.copied * static_cast<double>(b.tets)) / n;
  RetargetConfig ungated;
  ungated.mesh.proximity_gate.reset();
  const Residuals c = scaled_residuals(duo, ungated);
  const bool ok = n > 0 && pooled_opt < pooled_copy && c.tets > 0 && c.optimized < c.copied;
  return {ok, "default config " + fmt(pooled_opt) + " vs copy " + fmt(pooled_copy) + " over " +
                  std::to_string(a.tets) + "+" + std::to_string(b.tets) + " tets; two agents ungated " +
                  fmt(c.optimized) + " vs copy " + fmt(c.copied) + " over " + std::to_string(c.tets) + " tets"};
}

Outcome end_to_end_determinism() {
  const fs::path dir = fs::temp_directory_path() / "motionkit_acceptance_e2e";
  fs::remove_all(dir);
  synthetic::write_demo_corpus(dir);
  std::map<std::string, std::string> runs[2];
  for (auto& run : runs) {
    fs::remove_all(dir / "out");
#ifdef MOTIONKIT_CLI
    const std::string cmd = "'" MOTIONKIT_CLI "' pipeline --manifest '" + (dir / "manifest.json").string() +
                            "' --jobs 2 > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "pipeline command failed"};
#else
    run_pipeline(PipelineManifest::load(dir / "manifest.json"), 2);
#endif
    for (const auto& f : fs::directory_iterator(dir / "out")) run[f.path().filename().string()] = slurp(f.path());
  }
  fs::remove_all(dir);
  const bool same = runs[0] == runs[1] && runs[0].size() >= 8;
  return {same, std::to_string(runs[0].size()) + " output files " + (same ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"identity retargeting", identity_retargeting},
      {"laplacian algebra", laplacian_algebra},
      {"delaunay correctness", delaunay_correctness},
      {"gradient fidelity", gradient_fidelity},
      {"sobolev smoother", sobolev_smoother},
      {"contact zones", contact_zones},
      {"reward bounds and monotonicity", reward_bounds},
      {"schedule formulas", schedule_formulas},
      {"schedule simulator", schedule_simulator},
      {"train-to-filter", train_to_filter},
      {"laplacian fidelity vs copied rotations", laplacian_fidelity},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
