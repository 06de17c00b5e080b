#include "motionkit/retarget.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "motionkit/error.hpp"

namespace motionkit {

void RetargetConfig::validate() const {
  const TermWeights& w = weights;
  for (double x : {w.laplacian, w.temporal, w.joint_limit, w.velocity_limit, w.foot_slide}) {
    if (!(x >= 0.0)) throw ValidationError("retarget: term weights must be non-negative");
  }
  if (!(foot_speed_threshold > 0.0)) throw ValidationError("retarget: foot speed threshold must be positive");
  if (mesh.proximity_gate && !(*mesh.proximity_gate > 0.0)) {
    throw ValidationError("retarget: proximity gate must be positive");
  }
  if (mesh.max_object_vertices == 0) throw ValidationError("retarget: object subsample count must be >= 1");
  optimizer.validate();
}

namespace {

double hinge(double x) { return x > 0.0 ? x : 0.0; }
double hinge_slope(double x) { return x > 0.0 ? 1.0 : 0.0; }

// Shared implementation of the objective and its gradient.
double evaluate(std::span<const Pose> poses, const FrameContext& ctx, const RetargetConfig& cfg,
                ObjectiveTerms* terms, Eigen::VectorXd* grad) {
  const Skeleton& skel = *ctx.skeleton;
  const ShapeParams& shape = *ctx.shape;
  const TermWeights& w = cfg.weights;
  const std::size_t n_agents = ctx.agents.size();
  if (poses.size() != n_agents) {
    throw ValidationError("objective: " + std::to_string(poses.size()) + " poses for " +
                          std::to_string(n_agents) + " agents");
  }
  const std::size_t n_joints = skel.size();
  const std::size_t n_params = pose_parameter_count(n_joints);

  ObjectiveTerms t;
  if (grad) grad->setZero(static_cast<Eigen::Index>(n_params * n_agents));

  std::vector<JointPositions> positions(n_agents);
  std::vector<Eigen::VectorXd> pos_grad(n_agents, Eigen::VectorXd::Zero(3 * n_joints));
  for (std::size_t a = 0; a < n_agents; ++a) positions[a] = fk(skel, shape, poses[a]);

  // Laplacian consistency of the interact mesh.
  if (ctx.mesh == nullptr || ctx.mesh->empty()) {
    t.mesh_empty = true;
  } else if (w.laplacian > 0.0) {
    static const JointPositions kNone;
    const JointPositions& pa = positions[0];
    const JointPositions& pb = n_agents > 1 ? positions[1] : kNone;
    const InteractMesh& mesh = *ctx.mesh;
    for (std::size_t k = 0; k < mesh.tetrahedra.size(); ++k) {
      const Tet& tet = mesh.tetrahedra[k];
      Eigen::Matrix<double, 4, 3> rows;
      for (int r = 0; r < 4; ++r) {
        rows.row(r) = resolve_point(mesh.points[tet[r]], pa, pb, *ctx.object_vertices).transpose();
      }
      const Laplacian residual = mesh.reference_laplacians[k] - laplacian(rows);
      t.laplacian += w.laplacian * residual.squaredNorm();
      if (!grad) continue;
      // d/dP ||L_ref - M P||^2 = -2 M^T R with M = 4I - 11^T
      const Eigen::RowVector3d col_sum = residual.colwise().sum();
      for (int r = 0; r < 4; ++r) {
        const PointRef& ref = mesh.points[tet[r]];
        if (ref.source == PointSource::Object) continue;
        const std::size_t agent = ref.source == PointSource::AgentA ? 0 : 1;
        const Eigen::RowVector3d g = -2.0 * w.laplacian * (4.0 * residual.row(r) - col_sum);
        pos_grad[agent].segment<3>(3 * ref.index) += g.transpose();
      }
    }
  }

  for (std::size_t a = 0; a < n_agents; ++a) {
    const AgentFrameContext& ac = ctx.agents[a];
    const Pose& pose = poses[a];
    Eigen::VectorXd* g = nullptr;
    Eigen::VectorXd param_grad;
    if (grad) {
      param_grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_params));
      g = &param_grad;
    }

    // joint position limits
    for (std::size_t j = 1; j < n_joints; ++j) {
      const Joint& joint = skel.joints[j];
      const Vec3& q = pose.joint_rots[j - 1];
      for (int ax = 0; ax < 3; ++ax) {
        const double below = joint.q_min[ax] - q[ax];
        const double above = q[ax] - joint.q_max[ax];
        t.joint_limit += w.joint_limit * (hinge(below) + hinge(above));
        if (g) (*g)[kJointRotOffset + 3 * (j - 1) + ax] += w.joint_limit * (hinge_slope(above) - hinge_slope(below));
      }
    }

    if (ac.previous) {
      const Eigen::VectorXd x = pack_pose(pose);
      const Eigen::VectorXd x_prev = pack_pose(*ac.previous);
      Eigen::VectorXd d = x - x_prev;
      if (cfg.temporal == TemporalMode::SourceRelative && ac.source_previous) {
        d -= pack_pose(ac.source) - pack_pose(*ac.source_previous);
      }
      t.temporal += w.temporal * d.squaredNorm();
      if (g) *g += 2.0 * w.temporal * d;

      // per-step joint displacement bounds
      for (std::size_t j = 1; j < n_joints; ++j) {
        const Joint& joint = skel.joints[j];
        const Vec3 step = pose.joint_rots[j - 1] - ac.previous->joint_rots[j - 1];
        for (int ax = 0; ax < 3; ++ax) {
          const double below = joint.v_min * ctx.dt - step[ax];
          const double above = step[ax] - joint.v_max * ctx.dt;
          t.velocity_limit += w.velocity_limit * (hinge(below) + hinge(above));
          if (g) {
            (*g)[kJointRotOffset + 3 * (j - 1) + ax] +=
                w.velocity_limit * (hinge_slope(above) - hinge_slope(below));
          }
        }
      }

      for (std::size_t f : ac.planted_feet) {
        const Vec3 slide = positions[a][f] - ac.previous_positions[f];
        t.foot_slide += w.foot_slide * slide.squaredNorm();
        if (grad) pos_grad[a].segment<3>(3 * f) += 2.0 * w.foot_slide * slide;
      }
    }

    if (grad) {
      if (pos_grad[a].lpNorm<Eigen::Infinity>() > 0.0) {
        param_grad += fk_jacobian(skel, shape, pose).transpose() * pos_grad[a];
      }
      grad->segment(static_cast<Eigen::Index>(a * n_params), static_cast<Eigen::Index>(n_params)) = param_grad;
    }
  }

  t.total = t.laplacian + t.temporal + t.joint_limit + t.velocity_limit + t.foot_slide;
  if (terms) *terms = t;
  return t.total;
}

std::vector<Pose> unpack_all(const Eigen::VectorXd& x, std::size_t agents, std::size_t joints) {
  const auto n = static_cast<Eigen::Index>(pose_parameter_count(joints));
  std::vector<Pose> poses;
  for (std::size_t a = 0; a < agents; ++a) {
    poses.push_back(unpack_pose(x.segment(static_cast<Eigen::Index>(a) * n, n), joints));
  }
  return poses;
}

void check_compatible(const RetargetProblem& p) {
  if (!p.source_skeleton || !p.target_skeleton || !p.source || !p.object) {
    throw ValidationError("retarget: incomplete problem definition");
  }
  const Skeleton& s = *p.source_skeleton;
  const Skeleton& t = *p.target_skeleton;
  if (s.size() != t.size()) {
    throw ValidationError("retarget: source skeleton has " + std::to_string(s.size()) +
                          " joints, target has " + std::to_string(t.size()));
  }
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s.joints[j].parent != t.joints[j].parent) {
      throw ValidationError("retarget: joint '" + t.joints[j].name + "' has a different parent in the target");
    }
  }
  check_shape(s, p.source_shape);
  check_shape(t, p.target_shape);
  auto check_motion = [&](const MotionSequence& m, const char* what) {
    for (const MotionFrame& f : m.frames) {
      if (f.joint_rots.size() + 1 != s.size()) {
        throw ValidationError(std::string("retarget: ") + what + " motion joint count does not match skeleton");
      }
    }
  };
  check_motion(*p.source, "source");
  if (p.second_source) {
    check_motion(*p.second_source, "second-agent");
    if (p.second_source->size() != p.source->size()) {
      throw ValidationError("retarget: agent sequences differ in length (" + std::to_string(p.source->size()) +
                            " vs " + std::to_string(p.second_source->size()) + ")");
    }
  }
}

// Source poses with root quaternion signs made continuous over time.
Pose advance(const Pose& previous, const Pose& source_previous, const Pose& source) {
  Pose p = previous;
  p.root_pos += source.root_pos - source_previous.root_pos;
  p.root_rot = (source.root_rot * source_previous.root_rot.conjugate() * previous.root_rot).normalized();
  for (std::size_t j = 0; j < p.joint_rots.size(); ++j) {
    p.joint_rots[j] += source.joint_rots[j] - source_previous.joint_rots[j];
  }
  return p;
}

std::vector<Pose> continuous_poses(const MotionSequence& m) {
  std::vector<Pose> out;
  out.reserve(m.size());
  for (const MotionFrame& f : m.frames) {
    Pose p = Pose::from_frame(f);
    if (!out.empty() && out.back().root_rot.dot(p.root_rot) < 0.0) p.root_rot.coeffs() *= -1.0;
    out.push_back(std::move(p));
  }
  return out;
}

void clamp_to_limits(const Skeleton& skel, Pose& pose) {
  for (std::size_t j = 1; j < skel.size(); ++j) {
    pose.joint_rots[j - 1] = pose.joint_rots[j - 1].cwiseMax(skel.joints[j].q_min).cwiseMin(skel.joints[j].q_max);
  }
}

}  // namespace

ObjectiveTerms eval_objective(std::span<const Pose> poses, const FrameContext& ctx, const RetargetConfig& cfg) {
  ObjectiveTerms terms;
  evaluate(poses, ctx, cfg, &terms, nullptr);
  return terms;
}

Eigen::VectorXd objective_gradient(std::span<const Pose> poses, const FrameContext& ctx,
                                   const RetargetConfig& cfg) {
  Eigen::VectorXd g;
  evaluate(poses, ctx, cfg, nullptr, &g);
  return g;
}

std::vector<JointPositions> sequence_positions(const Skeleton& skeleton, const ShapeParams& shape,
                                               const MotionSequence& motion) {
  std::vector<JointPositions> out;
  out.reserve(motion.size());
  for (const MotionFrame& f : motion.frames) out.push_back(fk(skeleton, shape, Pose::from_frame(f)));
  return out;
}

SceneFrames prepare_scene(const RetargetProblem& problem, const RetargetConfig& cfg) {
  check_compatible(problem);
  const MotionSequence& src = *problem.source;
  SceneFrames scene;
  scene.source_a = sequence_positions(*problem.source_skeleton, problem.source_shape, src);
  if (problem.second_source) {
    scene.source_b = sequence_positions(*problem.source_skeleton, problem.source_shape, *problem.second_source);
  }
  const auto keep = farthest_point_sample(problem.object->vertices, cfg.mesh.max_object_vertices);
  Points object_frame;
  for (std::size_t i : keep) object_frame.push_back(problem.object->vertices[i]);

  static const JointPositions kNone;
  for (std::size_t t = 0; t < src.size(); ++t) {
    const MotionFrame& f = src.frames[t];
    scene.object_vertices.push_back(transform_vertices(object_frame, f.obj_pos, f.obj_rot));
    const JointPositions& b = problem.second_source ? scene.source_b[t] : kNone;
    if (cfg.mesh_rebuild == MeshRebuild::FirstFrame && t > 0) {
      InteractMesh mesh = scene.meshes.front();
      refresh_reference(mesh, scene.source_a[t], b, scene.object_vertices[t]);
      scene.meshes.push_back(std::move(mesh));
    } else {
      scene.meshes.push_back(build_interact_mesh(scene.source_a[t], b, scene.object_vertices[t], cfg.mesh));
    }
    if (scene.meshes.back().empty()) ++scene.empty_meshes;
  }
  return scene;
}

RetargetResult retarget_sequence(const RetargetProblem& problem, const RetargetConfig& cfg) {
  cfg.validate();
  const SceneFrames scene = prepare_scene(problem, cfg);
  const Skeleton& target = *problem.target_skeleton;
  const MotionSequence& src = *problem.source;
  const std::size_t n_frames = src.size();
  const std::size_t n_agents = problem.second_source ? 2 : 1;
  const std::size_t n_joints = target.size();
  const double dt = src.dt();

  if (n_frames > 0 && 2 * scene.empty_meshes > n_frames) {
    spdlog::warn("retarget: interact mesh empty on {} of {} frames", scene.empty_meshes, n_frames);
  }

  std::vector<std::vector<Pose>> source_poses{continuous_poses(src)};
  std::vector<const std::vector<JointPositions>*> source_positions{&scene.source_a};
  if (problem.second_source) {
    source_poses.push_back(continuous_poses(*problem.second_source));
    source_positions.push_back(&scene.source_b);
  }

  RetargetResult result;
  result.sequence = src;
  if (problem.second_source) result.second_sequence = *problem.second_source;
  result.empty_mesh_frames = scene.empty_meshes;

  std::vector<Pose> previous;
  for (std::size_t t = 0; t < n_frames; ++t) {
    FrameContext ctx;
    ctx.skeleton = &target;
    ctx.shape = &problem.target_shape;
    ctx.dt = dt;
    ctx.mesh = &scene.meshes[t];
    ctx.object_vertices = &scene.object_vertices[t];
    for (std::size_t a = 0; a < n_agents; ++a) {
      AgentFrameContext ac;
      ac.source = source_poses[a][t];
      if (t > 0) {
        ac.previous = previous[a];
        ac.source_previous = source_poses[a][t - 1];
        ac.previous_positions = fk(target, problem.target_shape, previous[a]);
        const auto& sp = *source_positions[a];
        for (std::size_t f : target.foot_joints) {
          const Vec3 d = sp[t][f] - sp[t - 1][f];
          const double horizontal_speed = std::hypot(d.x(), d.y()) / dt;
          if (horizontal_speed < cfg.foot_speed_threshold) ac.planted_feet.push_back(f);
        }
      }
      ctx.agents.push_back(std::move(ac));
    }

    std::vector<Pose> init;
    for (std::size_t a = 0; a < n_agents; ++a) {
      if (t == 0) {
        init.push_back(source_poses[a][0]);
      } else if (cfg.temporal == TemporalMode::SourceRelative) {
        // previous solution advanced by the source's own step: the minimizer
        // of the temporal term
        init.push_back(advance(previous[a], source_poses[a][t - 1], source_poses[a][t]));
      } else {
        init.push_back(previous[a]);
      }
    }

    Eigen::VectorXd x0(static_cast<Eigen::Index>(pose_parameter_count(n_joints) * n_agents));
    for (std::size_t a = 0; a < n_agents; ++a) {
      x0.segment(static_cast<Eigen::Index>(a * pose_parameter_count(n_joints)),
                 static_cast<Eigen::Index>(pose_parameter_count(n_joints))) = pack_pose(init[a]);
    }

    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      const std::vector<Pose> poses = unpack_all(x, n_agents, n_joints);
      return evaluate(poses, ctx, cfg, nullptr, grad);
    };
    auto normalize_quats = [&](Eigen::VectorXd& x) {
      for (std::size_t a = 0; a < n_agents; ++a) {
        auto q = x.segment<4>(static_cast<Eigen::Index>(a * pose_parameter_count(n_joints) + kRootQuatOffset));
        const double len = q.norm();
        if (len > 0.0) q /= len;
      }
    };

    OptimizeResult opt;
    try {
      opt = minimize_adam(objective, x0, cfg.optimizer, normalize_quats);
    } catch (const NumericalError& e) {
      throw NumericalError("retarget: frame " + std::to_string(t) + ": " + e.what());
    }

    std::vector<Pose> solution = unpack_all(opt.x, n_agents, n_joints);
    for (Pose& p : solution) clamp_to_limits(target, p);
    result.per_frame_losses.push_back(eval_objective(solution, ctx, cfg));
    result.iterations.push_back(opt.iterations);
    result.total_iterations += opt.iterations;
    result.converged = result.converged && opt.converged;

    solution[0].write_to(result.sequence.frames[t]);
    if (n_agents > 1) solution[1].write_to(result.second_sequence->frames[t]);
    previous = std::move(solution);
  }
  return result;
}

double mean_laplacian_residual(const SceneFrames& scene, const std::vector<JointPositions>& target_a,
                               const std::vector<JointPositions>& target_b) {
  static const JointPositions kNone;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < scene.meshes.size(); ++t) {
    const InteractMesh& mesh = scene.meshes[t];
    const JointPositions& b = target_b.empty() ? kNone : target_b[t];
    for (std::size_t k = 0; k < mesh.tetrahedra.size(); ++k) {
      Eigen::Matrix<double, 4, 3> rows;
      for (int r = 0; r < 4; ++r) {
        rows.row(r) = resolve_point(mesh.points[mesh.tetrahedra[k][r]], target_a[t], b,
                                    scene.object_vertices[t]).transpose();
      }
      sum += (mesh.reference_laplacians[k] - laplacian(rows)).norm();
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace motionkit
