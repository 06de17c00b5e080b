#include "motionkit/rotation.hpp"

#include <cmath>
#include <numbers>

namespace motionkit {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 exp_map(const Vec3& v) {
  const double theta = v.norm();
  if (theta < 1e-12) return Mat3::Identity() + skew(v);
  return Eigen::AngleAxisd(theta, v / theta).toRotationMatrix();
}

Quat exp_map_quat(const Vec3& v) {
  const double theta = v.norm();
  if (theta < 1e-12) return Quat(1.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z()).normalized();
  return Quat(Eigen::AngleAxisd(theta, v / theta));
}

Vec3 log_map(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Vec3 xyz(q.x(), q.y(), q.z());
  const double s = xyz.norm();
  if (s < 1e-12) return 2.0 * xyz;
  const double angle = 2.0 * std::atan2(s, q.w());
  return xyz * (angle / s);
}

std::array<Mat3, 3> exp_map_derivatives(const Vec3& v) {
  std::array<Mat3, 3> d;
  const double theta2 = v.squaredNorm();
  if (theta2 < 1e-8) {
    // second-order series around the identity
    const Mat3 vx = skew(v);
    for (int k = 0; k < 3; ++k) {
      const Mat3 ek = skew(Vec3::Unit(k));
      d[k] = ek + 0.5 * (ek * vx + vx * ek);
    }
    return d;
  }
  const Mat3 r = exp_map(v);
  const Mat3 vx = skew(v);
  const Mat3 i_minus_r = Mat3::Identity() - r;
  for (int k = 0; k < 3; ++k) {
    const Vec3 col = v.cross(i_minus_r.col(k));
    d[k] = ((v[k] * vx + skew(col)) / theta2) * r;
  }
  return d;
}

Mat3 quat_matrix(const Eigen::Vector4d& wxyz) {
  const Eigen::Vector4d n = wxyz.normalized();
  const double w = n[0], x = n[1], y = n[2], z = n[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

std::array<Mat3, 4> quat_matrix_derivatives(const Eigen::Vector4d& wxyz) {
  const double len = wxyz.norm();
  const Eigen::Vector4d n = wxyz / len;
  const double w = n[0], x = n[1], y = n[2], z = n[3];

  // derivatives of the unit-quaternion formula, treated as a polynomial in n
  std::array<Mat3, 4> dn;
  dn[0] << 0, -2 * z, 2 * y,
           2 * z, 0, -2 * x,
           -2 * y, 2 * x, 0;
  dn[1] << 0, 2 * y, 2 * z,
           2 * y, -4 * x, -2 * w,
           2 * z, 2 * w, -4 * x;
  dn[2] << -4 * y, 2 * x, 2 * w,
           2 * x, 0, 2 * z,
           -2 * w, 2 * z, -4 * y;
  dn[3] << -4 * z, -2 * w, 2 * x,
           2 * w, -4 * z, 2 * y,
           2 * x, 2 * y, 0;

  // chain through n = q / |q|: dn/dq = (I - n n^T) / |q|
  const Eigen::Matrix4d proj = (Eigen::Matrix4d::Identity() - n * n.transpose()) / len;
  std::array<Mat3, 4> d;
  for (int c = 0; c < 4; ++c) {
    d[c].setZero();
    for (int k = 0; k < 4; ++k) d[c] += dn[k] * proj(k, c);
  }
  return d;
}

Vec3 unwrap_near(const Vec3& v, const Vec3& reference) {
  const double theta = v.norm();
  if (theta < 1e-12) return v;
  const Vec3 axis = v / theta;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Vec3 best = v;
  double best_dist = (v - reference).squaredNorm();
  for (int k = -2; k <= 2; ++k) {
    if (k == 0) continue;
    const Vec3 cand = axis * (theta + two_pi * k);
    const double dist = (cand - reference).squaredNorm();
    if (dist < best_dist) {
      best = cand;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace motionkit
