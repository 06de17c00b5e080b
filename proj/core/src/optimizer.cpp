#include "motionkit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "motionkit/error.hpp"

namespace motionkit {

namespace {
constexpr int kMaxBacktracks = 30;
}  // namespace

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("optimizer: learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("optimizer: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("optimizer: beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("optimizer: epsilon must be positive");
  if (max_iterations < 0) throw ValidationError("optimizer: max_iterations must be >= 0");
  if (!(tolerance >= 0.0)) throw ValidationError("optimizer: tolerance must be >= 0");
  if (patience < 1) throw ValidationError("optimizer: patience must be >= 1");
  if (!(backoff > 0.0 && backoff < 1.0)) throw ValidationError("optimizer: backoff must lie in (0, 1)");
}

OptimizeResult minimize_adam(const Objective& objective, Eigen::VectorXd x,
                             const OptimizerConfig& cfg, const Projection& project) {
  if (project) project(x);
  const Eigen::Index n = x.size();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  double value = objective(x, &grad);
  if (!std::isfinite(value)) throw NumericalError("non-finite loss at iteration 0");

  OptimizeResult result;
  result.accepted_values.push_back(value);

  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd trial(n);
  Eigen::VectorXd trial_grad(n);
  double beta1_t = 1.0;
  double beta2_t = 1.0;
  int stalled = 0;

  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    if (value == 0.0 || grad.lpNorm<Eigen::Infinity>() == 0.0) {
      result.converged = true;
      break;
    }
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    beta1_t *= cfg.beta1;
    beta2_t *= cfg.beta2;
    const Eigen::VectorXd step =
        ((m / (1.0 - beta1_t)).array() / ((v / (1.0 - beta2_t)).array().sqrt() + cfg.epsilon)).matrix();

    // backtrack along the Adam direction until the objective does not increase
    double lr = cfg.learning_rate;
    bool accepted = false;
    double trial_value = value;
    for (int k = 0; k < kMaxBacktracks && !accepted; ++k, lr *= cfg.backoff) {
      trial = x - lr * step;
      if (project) project(trial);
      trial_value = objective(trial, &trial_grad);
      if (!std::isfinite(trial_value)) {
        throw NumericalError("non-finite loss at iteration " + std::to_string(it + 1));
      }
      accepted = trial_value <= value;
    }

    double improvement = 0.0;
    if (accepted) {
      improvement = (value - trial_value) / std::max(std::abs(value), std::numeric_limits<double>::min());
      x.swap(trial);
      grad.swap(trial_grad);
      value = trial_value;
      result.accepted_values.push_back(value);
    } else {
      // the accumulated moments point uphill; start them afresh
      m.setZero();
      v.setZero();
      beta1_t = beta2_t = 1.0;
    }

    stalled = improvement < cfg.tolerance ? stalled + 1 : 0;
    if (stalled >= cfg.patience) {
      ++it;
      result.converged = true;
      break;
    }
  }

  result.x = std::move(x);
  result.value = value;
  result.iterations = it;
  return result;
}

}  // namespace motionkit
