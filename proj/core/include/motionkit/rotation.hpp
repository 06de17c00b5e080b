#pragma once

#include <array>

#include "motionkit/types.hpp"

namespace motionkit {

Mat3 skew(const Vec3& v);

// Rodrigues: rotation vector (axis * angle, radians) -> rotation matrix.
Mat3 exp_map(const Vec3& v);

// Inverse of exp_map; the returned angle lies in [0, pi].
Vec3 log_map(const Quat& q);
Quat exp_map_quat(const Vec3& v);

// dR/dv_k for k = 0, 1, 2.
std::array<Mat3, 3> exp_map_derivatives(const Vec3& v);

// Rotation matrix of q / |q|. Components ordered (w, x, y, z).
Mat3 quat_matrix(const Eigen::Vector4d& wxyz);

// Derivatives of quat_matrix with respect to the unnormalized (w, x, y, z),
// including the normalization.
std::array<Mat3, 4> quat_matrix_derivatives(const Eigen::Vector4d& wxyz);

inline Eigen::Vector4d to_wxyz(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }
inline Quat from_wxyz(const Eigen::Vector4d& v) { return Quat(v[0], v[1], v[2], v[3]); }

// Re-express `v` as the equivalent rotation vector closest to `reference`
// (candidates differ by multiples of 2*pi along v's axis).
Vec3 unwrap_near(const Vec3& v, const Vec3& reference);

}  // namespace motionkit
