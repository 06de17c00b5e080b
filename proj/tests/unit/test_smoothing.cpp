#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "motionkit/error.hpp"
#include "motionkit/rotation.hpp"
#include "motionkit/smoothing.hpp"
#include "motionkit/synthetic.hpp"

using namespace motionkit;

namespace {

Trajectory noisy_walk(std::mt19937_64& rng, Eigen::Index n, double noise) {
  std::normal_distribution<double> g(0.0, noise);
  Trajectory t(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / 30.0;
    t.row(i) << 0.8 * s + g(rng), 0.3 * std::sin(s) + g(rng), 0.9 + 0.02 * std::sin(4 * s) + g(rng);
  }
  return t;
}

Trajectory dense_smooth(const Trajectory& t, double alpha) {
  const auto n = static_cast<std::size_t>(t.rows());
  const Eigen::MatrixXd d = second_diff_matrix(n);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(t.rows(), t.rows()) + alpha * d.transpose() * d;
  return a.ldlt().solve(t);
}

}  // namespace

TEST(SecondDifference, SmallestOperator) {
  Eigen::MatrixXd expected(1, 3);
  expected << 1, -2, 1;
  EXPECT_EQ(second_diff_matrix(3), expected);
  EXPECT_THROW(second_diff_matrix(2), ValidationError);
}

TEST(SecondDifference, AnnihilatesAffineAndMeasuresQuadratic) {
  const Eigen::MatrixXd d = second_diff_matrix(6);
  Eigen::VectorXd affine(6), square(6);
  for (int k = 0; k < 6; ++k) {
    affine[k] = 3.0 * k - 7.0;
    square[k] = k * k;
  }
  EXPECT_LT((d * affine).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE((d * square).isApprox(Eigen::VectorXd::Constant(4, 2.0)));
}

TEST(SobolevSystem, MatchesDenseAssembly) {
  for (std::size_t n : {3u, 4u, 5u, 9u}) {
    const SymmetricPentadiagonal a = sobolev_system(n, 2.5);
    const Eigen::MatrixXd d = second_diff_matrix(n);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + 2.5 * d.transpose() * d;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      EXPECT_DOUBLE_EQ(a.diag[i], m(ii, ii));
      if (i + 1 < n) {
        EXPECT_DOUBLE_EQ(a.off1[i], m(ii, ii + 1));
      }
      if (i + 2 < n) {
        EXPECT_DOUBLE_EQ(a.off2[i], m(ii, ii + 2));
      }
    }
  }
}

TEST(SmoothRoot, HandSolvedThreeFrames) {
  Trajectory t = Trajectory::Zero(3, 3);
  t(1, 0) = 1.0;
  const Trajectory s = smooth_root(t, 1.0);
  EXPECT_NEAR(s(0, 0), 2.0 / 7.0, 1e-12);
  EXPECT_NEAR(s(1, 0), 3.0 / 7.0, 1e-12);
  EXPECT_NEAR(s(2, 0), 2.0 / 7.0, 1e-12);
  EXPECT_EQ(s.col(1).norm(), 0.0);
}

TEST(SmoothRoot, ZeroAlphaIsExactIdentity) {
  std::mt19937_64 rng(1);
  const Trajectory t = noisy_walk(rng, 40, 0.01);
  EXPECT_EQ(smooth_root(t, 0.0), t);
}

TEST(SmoothRoot, AffineTrajectoryIsAFixedPoint) {
  Trajectory t(25, 3);
  for (Eigen::Index i = 0; i < 25; ++i) t.row(i) << 1.0, 0.1 * i, -0.3 * i + 2.0;
  for (double alpha : {0.1, 10.0, 1e4}) EXPECT_LT((smooth_root(t, alpha) - t).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SmoothRoot, MatchesDenseSolve) {
  std::mt19937_64 rng(2);
  for (double alpha : {0.5, 10.0, 300.0}) {
    const Trajectory t = noisy_walk(rng, 60, 0.02);
    EXPECT_LT((smooth_root(t, alpha) - dense_smooth(t, alpha)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SmoothRoot, EnergyDecreasesAndDeviationGrowsWithAlpha) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory t = noisy_walk(rng, 50, 0.02);
    const Eigen::Vector3d before = second_difference_energy(t);
    double last_deviation = 0.0;
    for (double alpha : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
      const Trajectory s = smooth_root(t, alpha);
      const Eigen::Vector3d after = second_difference_energy(s);
      for (int ax = 0; ax < 3; ++ax) EXPECT_LE(after[ax], before[ax]);
      const double deviation = (s - t).norm();
      EXPECT_GE(deviation, last_deviation - 1e-12);
      last_deviation = deviation;
    }
  }
}

TEST(SmoothRoot, LargeAlphaApproachesTheLeastSquaresLine) {
  std::mt19937_64 rng(4);
  const Trajectory t = noisy_walk(rng, 30, 0.05);
  const Trajectory s = smooth_root(t, 1e8);
  EXPECT_LT(second_difference_energy(s).maxCoeff(), 1e-10);
  Eigen::MatrixXd design(30, 2);
  for (Eigen::Index i = 0; i < 30; ++i) design.row(i) << 1.0, static_cast<double>(i);
  const Eigen::MatrixXd line = design * design.colPivHouseholderQr().solve(Eigen::MatrixXd(t));
  EXPECT_LT((s - line).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(SmoothRoot, ShortSequencesAreReturnedUnchanged) {
  Trajectory t(2, 3);
  t << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(smooth_root(t, 10.0), t);
  EXPECT_EQ(smooth_root(Trajectory(0, 3), 10.0).rows(), 0);
  EXPECT_EQ(second_difference_energy(t), Eigen::Vector3d::Zero());
}

TEST(SmoothRoot, NegativeAlphaThrows) {
  EXPECT_THROW(smooth_root(Trajectory::Zero(5, 3), -1.0), ValidationError);
}

TEST(SmoothConfig, Validation) {
  EXPECT_NO_THROW((SmoothConfig{10.0, 5}.validate(5)));
  EXPECT_THROW((SmoothConfig{-0.1, 5}.validate(10)), ValidationError);
  EXPECT_THROW((SmoothConfig{1.0, 4}.validate(10)), ValidationError);
  EXPECT_THROW((SmoothConfig{1.0, 0}.validate(10)), ValidationError);
  EXPECT_THROW((SmoothConfig{1.0, 7}.validate(5)), ValidationError);
}

TEST(SmoothRotations, UnitWindowIsIdentity) {
  const auto scene = synthetic::held_box_scene(12, false);
  const MotionSequence out = smooth_rotations(scene.agent_a, 1);
  EXPECT_EQ(dump_motion(out), dump_motion(scene.agent_a));
}

TEST(SmoothRotations, ConstantSequenceIsAFixedPoint) {
  auto scene = synthetic::held_box_scene(9, false);
  for (auto& f : scene.agent_a.frames) f = scene.agent_a.frames[4];
  const MotionSequence out = smooth_rotations(scene.agent_a, 5);
  for (std::size_t t = 0; t < out.size(); ++t) {
    EXPECT_LT(out.frames[t].root_rot.angularDistance(scene.agent_a.frames[t].root_rot), 1e-12);
    for (std::size_t j = 0; j < out.frames[t].joint_rots.size(); ++j) {
      EXPECT_LT((out.frames[t].joint_rots[j] - scene.agent_a.frames[t].joint_rots[j]).norm(), 1e-12);
    }
  }
}

TEST(SmoothRotations, ReducesJitterAndKeepsUnitQuaternions) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.05);
  auto scene = synthetic::held_box_scene(40, false);
  MotionSequence noisy = scene.agent_a;
  for (auto& f : noisy.frames) {
    for (auto& q : f.joint_rots) q += Vec3(g(rng), g(rng), g(rng));
    f.root_rot = (f.root_rot * exp_map(Vec3(g(rng), g(rng), g(rng)))).normalized();
  }
  // root quaternion stored with a random sign must not matter
  noisy.frames[10].root_rot.coeffs() *= -1.0;
  const MotionSequence out = smooth_rotations(noisy, 5);
  auto jitter = [](const MotionSequence& m) {
    double e = 0.0;
    for (std::size_t t = 2; t < m.size(); ++t)
      for (std::size_t j = 0; j < m.frames[t].joint_rots.size(); ++j)
        e += (m.frames[t].joint_rots[j] - 2.0 * m.frames[t - 1].joint_rots[j] + m.frames[t - 2].joint_rots[j])
                 .squaredNorm();
    return e;
  };
  EXPECT_LT(jitter(out), jitter(noisy));
  for (std::size_t t = 0; t < out.size(); ++t) {
    EXPECT_NEAR(out.frames[t].root_rot.norm(), 1.0, 1e-12);
    EXPECT_LT(out.frames[t].root_rot.angularDistance(scene.agent_a.frames[t].root_rot), 0.2);
  }
}

TEST(SmoothMotion, SmoothsRootAndLeavesObjectAlone) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.01);
  auto scene = synthetic::held_box_scene(30, false);
  for (auto& f : scene.agent_a.frames) f.root_pos += Vec3(g(rng), g(rng), g(rng));
  const MotionSequence out = smooth_motion(scene.agent_a, SmoothConfig{10.0, 3});
  const Eigen::Vector3d before = second_difference_energy(root_trajectory(scene.agent_a));
  const Eigen::Vector3d after = second_difference_energy(root_trajectory(out));
  for (int ax = 0; ax < 3; ++ax) EXPECT_LT(after[ax], before[ax]);
  for (std::size_t t = 0; t < out.size(); ++t) {
    EXPECT_EQ(out.frames[t].obj_pos, scene.agent_a.frames[t].obj_pos);
  }
}
