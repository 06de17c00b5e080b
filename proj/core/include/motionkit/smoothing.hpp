#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "motionkit/banded.hpp"
#include "motionkit/motionio.hpp"

namespace motionkit {

using Trajectory = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct SmoothConfig {
  double alpha = 10.0;
  int window = 5;  // odd, frames

  // Throws ValidationError; `frames` bounds the window.
  void validate(std::size_t frames) const;
};

// (n-2) x n, row k = [.., 1, -2, 1, ..] at columns k..k+2. Requires n >= 3.
Eigen::MatrixXd second_diff_matrix(std::size_t n);

// I + alpha (D2)^T D2 in banded form.
SymmetricPentadiagonal sobolev_system(std::size_t n, double alpha);

// Solves (I + alpha (D2)^T D2) t* = t per axis. Sequences shorter than three
// frames are returned unchanged.
Trajectory smooth_root(const Trajectory& traj, double alpha);

// ||D2 t||^2 per axis (zero for fewer than three frames).
Eigen::Vector3d second_difference_energy(const Trajectory& traj);

// Centered sliding-window mean of the joint exponential maps (neighbors
// unwrapped to within pi of the center) and sign-aligned mean of the root
// quaternion; windows are truncated at the sequence ends.
MotionSequence smooth_rotations(const MotionSequence& seq, int window);

Trajectory root_trajectory(const MotionSequence& seq);
void set_root_trajectory(MotionSequence& seq, const Trajectory& traj);

// smooth_root on the root translation, then smooth_rotations.
MotionSequence smooth_motion(const MotionSequence& seq, const SmoothConfig& cfg);

}  // namespace motionkit
