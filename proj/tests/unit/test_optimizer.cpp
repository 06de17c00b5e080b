#include <cmath>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "motionkit/error.hpp"
#include "motionkit/optimizer.hpp"

using namespace motionkit;

namespace {

double quadratic(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
  const Eigen::Vector2d c(1.0, -2.0);
  const Eigen::Vector2d d = x - c;
  if (g) *g = 2.0 * d;
  return d.squaredNorm();
}

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
  const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
  if (g) {
    g->resize(2);
    (*g)[0] = -2.0 * a - 400.0 * x[0] * b;
    (*g)[1] = 200.0 * b;
  }
  return a * a + 100.0 * b * b;
}

}  // namespace

TEST(Adam, MinimizesAQuadratic) {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.max_iterations = 2000;
  const OptimizeResult r = minimize_adam(quadratic, Eigen::Vector2d(5.0, 5.0), cfg);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], -2.0, 1e-4);
  EXPECT_LT(r.value, 1e-8);
}

TEST(Adam, AcceptedValuesNeverIncrease) {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.max_iterations = 3000;
  const OptimizeResult r = minimize_adam(rosenbrock, Eigen::Vector2d(-1.2, 1.0), cfg);
  ASSERT_GT(r.accepted_values.size(), 10u);
  EXPECT_DOUBLE_EQ(r.accepted_values.front(), rosenbrock(Eigen::Vector2d(-1.2, 1.0), nullptr));
  for (std::size_t k = 1; k < r.accepted_values.size(); ++k) {
    EXPECT_LE(r.accepted_values[k], r.accepted_values[k - 1]);
  }
  EXPECT_DOUBLE_EQ(r.value, r.accepted_values.back());
  EXPECT_LT(r.value, 1e-2);
}

TEST(Adam, StopsEarlyAtAStationaryPoint) {
  OptimizerConfig cfg;
  const OptimizeResult r = minimize_adam(quadratic, Eigen::Vector2d(1.0, -2.0), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, cfg.patience + 1);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Adam, NonFiniteLossNamesTheIteration) {
  auto bad = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = Eigen::VectorXd::Ones(x.size());
    return x[0] < 0.995 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  OptimizerConfig cfg;
  try {
    minimize_adam(bad, Eigen::VectorXd::Ones(1), cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos) << e.what();
  }
}

TEST(Adam, ProjectionIsApplied) {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.max_iterations = 500;
  auto clamp = [](Eigen::VectorXd& x) { x = x.cwiseMax(0.0); };
  const OptimizeResult r = minimize_adam(quadratic, Eigen::Vector2d(2.0, 2.0), cfg, clamp);
  EXPECT_GE(r.x[1], 0.0);
  EXPECT_NEAR(r.x[1], 0.0, 1e-9);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
}

TEST(Adam, IsDeterministic) {
  OptimizerConfig cfg;
  cfg.max_iterations = 300;
  const OptimizeResult a = minimize_adam(rosenbrock, Eigen::Vector2d(-1.2, 1.0), cfg);
  const OptimizeResult b = minimize_adam(rosenbrock, Eigen::Vector2d(-1.2, 1.0), cfg);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.accepted_values, b.accepted_values);
}

TEST(Adam, RejectsInvalidConfig) {
  OptimizerConfig cfg;
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.max_iterations = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.patience = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.backoff = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
