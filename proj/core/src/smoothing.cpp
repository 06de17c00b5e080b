#include "motionkit/smoothing.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "motionkit/error.hpp"
#include "motionkit/rotation.hpp"

namespace motionkit {

void SmoothConfig::validate(std::size_t frames) const {
  if (!(alpha >= 0.0)) throw ValidationError("smooth: alpha must be >= 0");
  if (window < 1 || window % 2 == 0) throw ValidationError("smooth: window must be an odd integer >= 1");
  if (frames > 0 && static_cast<std::size_t>(window) > frames) {
    throw ValidationError("smooth: window " + std::to_string(window) + " exceeds sequence length " +
                          std::to_string(frames));
  }
}

Eigen::MatrixXd second_diff_matrix(std::size_t n) {
  if (n < 3) throw ValidationError("second difference operator needs n >= 3, got " + std::to_string(n));
  const auto rows = static_cast<Eigen::Index>(n - 2);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < rows; ++k) {
    d(k, k) = 1.0;
    d(k, k + 1) = -2.0;
    d(k, k + 2) = 1.0;
  }
  return d;
}

SymmetricPentadiagonal sobolev_system(std::size_t n, double alpha) {
  SymmetricPentadiagonal a(n);
  std::fill(a.diag.begin(), a.diag.end(), 1.0);
  // accumulate alpha * r^T r for every stencil row r = [1, -2, 1]
  for (std::size_t k = 0; k + 2 < n; ++k) {
    a.diag[k] += alpha;
    a.diag[k + 1] += 4.0 * alpha;
    a.diag[k + 2] += alpha;
    a.off1[k] += -2.0 * alpha;
    a.off1[k + 1] += -2.0 * alpha;
    a.off2[k] += alpha;
  }
  return a;
}

Trajectory smooth_root(const Trajectory& traj, double alpha) {
  if (!(alpha >= 0.0)) throw ValidationError("smooth_root: alpha must be >= 0");
  const auto n = static_cast<std::size_t>(traj.rows());
  if (n < 3) {
    spdlog::warn("smooth_root: {} frame(s), second difference undefined; trajectory left unchanged", n);
    return traj;
  }
  if (alpha == 0.0) return traj;
  const PentadiagonalLdlt solver(sobolev_system(n, alpha));
  Trajectory out(traj.rows(), 3);
  std::vector<double> column(n);
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < n; ++i) column[i] = traj(static_cast<Eigen::Index>(i), axis);
    const std::vector<double> solved = solver.solve(column);
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i), axis) = solved[i];
  }
  return out;
}

Eigen::Vector3d second_difference_energy(const Trajectory& traj) {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  for (Eigen::Index k = 0; k + 2 < traj.rows(); ++k) {
    const Eigen::RowVector3d d = traj.row(k) - 2.0 * traj.row(k + 1) + traj.row(k + 2);
    e += d.cwiseAbs2().transpose();
  }
  return e;
}

MotionSequence smooth_rotations(const MotionSequence& seq, int window) {
  SmoothConfig{0.0, window}.validate(seq.size());
  if (window == 1) return seq;
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  const std::ptrdiff_t half = window / 2;
  MotionSequence out = seq;
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, k + half);
    const double count = static_cast<double>(hi - lo + 1);
    const MotionFrame& center = seq.frames[static_cast<std::size_t>(k)];
    MotionFrame& target = out.frames[static_cast<std::size_t>(k)];

    for (std::size_t j = 0; j < center.joint_rots.size(); ++j) {
      Vec3 sum = Vec3::Zero();
      for (std::ptrdiff_t m = lo; m <= hi; ++m) {
        sum += unwrap_near(seq.frames[static_cast<std::size_t>(m)].joint_rots[j], center.joint_rots[j]);
      }
      target.joint_rots[j] = sum / count;
    }

    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    const Eigen::Vector4d c = to_wxyz(center.root_rot);
    for (std::ptrdiff_t m = lo; m <= hi; ++m) {
      Eigen::Vector4d q = to_wxyz(seq.frames[static_cast<std::size_t>(m)].root_rot);
      if (q.dot(c) < 0.0) q = -q;
      acc += q;
    }
    target.root_rot = from_wxyz(acc.normalized());
  }
  return out;
}

Trajectory root_trajectory(const MotionSequence& seq) {
  Trajectory t(static_cast<Eigen::Index>(seq.size()), 3);
  for (std::size_t i = 0; i < seq.size(); ++i) t.row(static_cast<Eigen::Index>(i)) = seq.frames[i].root_pos.transpose();
  return t;
}

void set_root_trajectory(MotionSequence& seq, const Trajectory& traj) {
  for (std::size_t i = 0; i < seq.size(); ++i) seq.frames[i].root_pos = traj.row(static_cast<Eigen::Index>(i)).transpose();
}

MotionSequence smooth_motion(const MotionSequence& seq, const SmoothConfig& cfg) {
  cfg.validate(seq.size());
  MotionSequence out = seq;
  set_root_trajectory(out, smooth_root(root_trajectory(seq), cfg.alpha));
  return smooth_rotations(out, cfg.window);
}

}  // namespace motionkit
