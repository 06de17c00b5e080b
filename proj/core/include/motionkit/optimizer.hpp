#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace motionkit {

struct OptimizerConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_iterations = 500;
  // Stop once the relative improvement stays below `tolerance` for
  // `patience` consecutive iterations.
  double tolerance = 1e-10;
  int patience = 20;
  // A step that increases the objective is retried with its length
  // multiplied by this factor (each iteration starts from learning_rate).
  double backoff = 0.5;

  void validate() const;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  // objective after each accepted step, starting with the initial value
  std::vector<double> accepted_values;
};

// Returns f(x) and writes the gradient into *grad when it is non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
// Maps an iterate back onto the feasible set (clamping, renormalizing).
using Projection = std::function<void(Eigen::VectorXd& x)>;

// Adam with backtracking step acceptance: the objective is non-increasing
// over accepted iterates. An iteration with no acceptable step resets the
// moment estimates. Throws NumericalError on a non-finite objective.
OptimizeResult minimize_adam(const Objective& objective, Eigen::VectorXd x0,
                             const OptimizerConfig& config, const Projection& project = {});

}  // namespace motionkit
