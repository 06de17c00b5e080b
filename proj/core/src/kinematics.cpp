#include "motionkit/kinematics.hpp"

#include <cmath>
#include <string>

#include "motionkit/error.hpp"
#include "motionkit/rotation.hpp"

namespace motionkit {

namespace {

struct FkFrames {
  JointPositions positions;
  std::vector<Mat3> world;         // world rotation of each joint
  std::vector<Mat3> local;         // rotation contributed by the joint itself
};

FkFrames forward(const Skeleton& skel, const ShapeParams& shape, const Pose& pose) {
  const std::size_t n = skel.size();
  FkFrames f;
  f.positions.resize(n);
  f.world.resize(n);
  f.local.resize(n);
  f.local[0] = quat_matrix(to_wxyz(pose.root_rot));
  f.world[0] = f.local[0];
  f.positions[0] = pose.root_pos;
  for (std::size_t j = 1; j < n; ++j) {
    const std::size_t p = *skel.joints[j].parent;
    f.local[j] = exp_map(pose.joint_rots[j - 1]);
    f.world[j] = f.world[p] * f.local[j];
    f.positions[j] = f.positions[p] + f.world[p] * (shape.bone_scales[j] * skel.joints[j].rest_offset);
  }
  return f;
}

// descendants[k] lists k's strict descendants; topological order makes a
// single backwards sweep sufficient.
std::vector<std::vector<std::size_t>> descendants(const Skeleton& skel) {
  const std::size_t n = skel.size();
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t j = n; j-- > 1;) {
    const std::size_t p = *skel.joints[j].parent;
    out[p].push_back(j);
    out[p].insert(out[p].end(), out[j].begin(), out[j].end());
  }
  return out;
}

}  // namespace

Pose Pose::tpose(const Skeleton& skeleton) {
  Pose p;
  p.joint_rots.assign(skeleton.size() - 1, Vec3::Zero());
  return p;
}

Pose Pose::from_frame(const MotionFrame& frame) {
  return Pose{frame.root_pos, frame.root_rot, frame.joint_rots};
}

void Pose::write_to(MotionFrame& frame) const {
  frame.root_pos = root_pos;
  frame.root_rot = root_rot.normalized();
  frame.joint_rots = joint_rots;
}

Eigen::VectorXd pack_pose(const Pose& pose) {
  Eigen::VectorXd x(kJointRotOffset + 3 * pose.joint_rots.size());
  x.segment<3>(0) = pose.root_pos;
  x.segment<4>(kRootQuatOffset) = to_wxyz(pose.root_rot);
  for (std::size_t j = 0; j < pose.joint_rots.size(); ++j) {
    x.segment<3>(kJointRotOffset + 3 * j) = pose.joint_rots[j];
  }
  return x;
}

Pose unpack_pose(const Eigen::Ref<const Eigen::VectorXd>& x, std::size_t joint_count) {
  if (static_cast<std::size_t>(x.size()) != pose_parameter_count(joint_count)) {
    throw ValidationError("pose parameter vector has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(pose_parameter_count(joint_count)));
  }
  Pose p;
  p.root_pos = x.segment<3>(0);
  p.root_rot = from_wxyz(x.segment<4>(kRootQuatOffset));
  p.joint_rots.resize(joint_count - 1);
  for (std::size_t j = 0; j + 1 < joint_count; ++j) {
    p.joint_rots[j] = x.segment<3>(kJointRotOffset + 3 * j);
  }
  return p;
}

void check_pose(const Skeleton& skeleton, const Pose& pose) {
  if (pose.joint_rots.size() + 1 != skeleton.size()) {
    throw ValidationError("pose has " + std::to_string(pose.joint_rots.size()) +
                          " joint rotations but skeleton has " + std::to_string(skeleton.size()) +
                          " joints (" + std::to_string(skeleton.size() - 1) + " non-root)");
  }
  if (!(pose.root_rot.norm() > 0.0)) throw ValidationError("pose root quaternion is zero");
}

void check_shape(const Skeleton& skeleton, const ShapeParams& shape) {
  if (shape.bone_scales.size() != skeleton.size()) {
    throw ValidationError("shape has " + std::to_string(shape.bone_scales.size()) +
                          " bone scales but skeleton has " + std::to_string(skeleton.size()) + " joints");
  }
  for (std::size_t j = 0; j < shape.bone_scales.size(); ++j) {
    if (!(shape.bone_scales[j] > 0.0)) {
      throw ValidationError("bone scale of joint '" + skeleton.joints[j].name + "' must be positive");
    }
  }
}

JointPositions fk(const Skeleton& skeleton, const ShapeParams& shape, const Pose& pose) {
  check_pose(skeleton, pose);
  check_shape(skeleton, shape);
  return forward(skeleton, shape, pose).positions;
}

Eigen::MatrixXd fk_jacobian(const Skeleton& skeleton, const ShapeParams& shape, const Pose& pose) {
  check_pose(skeleton, pose);
  check_shape(skeleton, shape);
  const std::size_t n = skeleton.size();
  const FkFrames f = forward(skeleton, shape, pose);
  const auto desc = descendants(skeleton);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * n, pose_parameter_count(n));

  for (std::size_t i = 0; i < n; ++i) jac.block<3, 3>(3 * i, 0).setIdentity();

  // A rotation R at joint k with parent frame P moves every descendant i by
  // d p_i = P dR R^T P^T (p_i - p_k).
  {
    const auto dq = quat_matrix_derivatives(to_wxyz(pose.root_rot));
    const Mat3 rt = f.local[0].transpose();
    for (int c = 0; c < 4; ++c) {
      const Mat3 a = dq[c] * rt;
      for (std::size_t i : desc[0]) {
        jac.block<3, 1>(3 * i, kRootQuatOffset + c) = a * (f.positions[i] - f.positions[0]);
      }
    }
  }
  for (std::size_t k = 1; k < n; ++k) {
    const Mat3& parent_world = f.world[*skeleton.joints[k].parent];
    const auto dr = exp_map_derivatives(pose.joint_rots[k - 1]);
    const Mat3 rt = f.local[k].transpose();
    for (int c = 0; c < 3; ++c) {
      const Mat3 a = parent_world * dr[c] * rt * parent_world.transpose();
      for (std::size_t i : desc[k]) {
        jac.block<3, 1>(3 * i, kJointRotOffset + 3 * (k - 1) + c) = a * (f.positions[i] - f.positions[k]);
      }
    }
  }
  return jac;
}

Eigen::MatrixXd fk_shape_jacobian(const Skeleton& skeleton, const ShapeParams& shape, const Pose& pose) {
  check_pose(skeleton, pose);
  check_shape(skeleton, shape);
  const std::size_t n = skeleton.size();
  const FkFrames f = forward(skeleton, shape, pose);
  const auto desc = descendants(skeleton);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * n, n);
  for (std::size_t k = 1; k < n; ++k) {
    const Vec3 d = f.world[*skeleton.joints[k].parent] * skeleton.joints[k].rest_offset;
    jac.block<3, 1>(3 * k, k) = d;
    for (std::size_t i : desc[k]) jac.block<3, 1>(3 * i, k) = d;
  }
  return jac;
}

ShapeFitResult fit_shape(const Skeleton& skeleton, const JointPositions& source_tpose,
                         const OptimizerConfig& config) {
  config.validate();
  const std::size_t n = skeleton.size();
  if (source_tpose.size() != n) {
    throw ValidationError("shape fit: source has " + std::to_string(source_tpose.size()) +
                          " joints but skeleton has " + std::to_string(n));
  }
  const Pose tpose = Pose::tpose(skeleton);

  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const ShapeParams shape{std::vector<double>(x.data(), x.data() + x.size())};
    const JointPositions p = forward(skeleton, shape, tpose).positions;
    Eigen::VectorXd residual(3 * n);
    for (std::size_t i = 0; i < n; ++i) residual.segment<3>(3 * i) = p[i] - source_tpose[i];
    if (grad) *grad = 2.0 * fk_shape_jacobian(skeleton, shape, tpose).transpose() * residual;
    return residual.squaredNorm();
  };
  auto clamp = [](Eigen::VectorXd& x) { x = x.cwiseMax(kMinBoneScale).cwiseMin(kMaxBoneScale); };

  OptimizeResult opt = minimize_adam(objective, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), config, clamp);

  ShapeFitResult out;
  out.shape.bone_scales.assign(opt.x.data(), opt.x.data() + opt.x.size());
  out.residual = std::sqrt(opt.value / static_cast<double>(n));
  out.iterations = opt.iterations;
  out.converged = opt.converged;
  out.losses = std::move(opt.accepted_values);
  return out;
}

}  // namespace motionkit
