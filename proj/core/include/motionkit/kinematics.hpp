#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "motionkit/motionio.hpp"
#include "motionkit/optimizer.hpp"
#include "motionkit/types.hpp"

namespace motionkit {

struct Pose {
  Vec3 root_pos = Vec3::Zero();
  Quat root_rot = Quat::Identity();
  std::vector<Vec3> joint_rots;  // exponential maps of the non-root joints

  // All-identity rotations at the origin.
  static Pose tpose(const Skeleton& skeleton);
  static Pose from_frame(const MotionFrame& frame);
  void write_to(MotionFrame& frame) const;
};

// Parameter layout used by Jacobians and optimizers:
// [root_pos (3) | root quaternion w,x,y,z (4) | joint exp-maps (3 per non-root joint)]
constexpr std::size_t kRootQuatOffset = 3;
constexpr std::size_t kJointRotOffset = 7;
inline std::size_t pose_parameter_count(std::size_t joint_count) {
  return kJointRotOffset + 3 * (joint_count - 1);
}
Eigen::VectorXd pack_pose(const Pose& pose);
Pose unpack_pose(const Eigen::Ref<const Eigen::VectorXd>& params, std::size_t joint_count);

// Joint j sits at parent position + parent world rotation * (scale_j * offset_j);
// its own rotation applies to its children. The root sits at root_pos.
JointPositions fk(const Skeleton& skeleton, const ShapeParams& shape, const Pose& pose);

// d(positions)/d(pose parameters), (3J) x pose_parameter_count(J). The
// quaternion columns differentiate through the normalization q / |q|.
Eigen::MatrixXd fk_jacobian(const Skeleton& skeleton, const ShapeParams& shape, const Pose& pose);

// d(positions)/d(bone scales), (3J) x J.
Eigen::MatrixXd fk_shape_jacobian(const Skeleton& skeleton, const ShapeParams& shape, const Pose& pose);

struct ShapeFitResult {
  ShapeParams shape;
  double residual = 0.0;  // RMS joint error at the optimum (meters)
  int iterations = 0;
  bool converged = false;
  std::vector<double> losses;  // accepted objective values
};

constexpr double kMinBoneScale = 0.1;
constexpr double kMaxBoneScale = 10.0;

// Fits bone scales so the skeleton's T-pose joints match `source_tpose`,
// starting from all-ones and clamping scales to [0.1, 10].
ShapeFitResult fit_shape(const Skeleton& skeleton, const JointPositions& source_tpose,
                         const OptimizerConfig& config = {});

void check_pose(const Skeleton& skeleton, const Pose& pose);
void check_shape(const Skeleton& skeleton, const ShapeParams& shape);

}  // namespace motionkit
