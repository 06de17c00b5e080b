#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace motionkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Points = std::vector<Vec3>;

// World-frame joint positions, one per skeleton joint (meters).
using JointPositions = Points;

}  // namespace motionkit
