#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace mcid {

struct AscentOptions {
  int max_iters = 5000;
  double step_size = 1.0;  // length of the first trial step along the gradient
  double tol = 1e-6;       // stop when the gradient infinity-norm falls below this
  int history = 10;        // L-BFGS memory
  int max_halvings = 60;
  // Coordinates held at their initial value (gradient masked).
  std::vector<bool> frozen;
};

struct AscentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after each accepted step, starting with f(x0)
};

// Objective returning f(x) and writing its gradient. May return -inf (or NaN)
// to signal an infeasible point; such steps are halved away.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Maximizes f by limited-memory quasi-Newton ascent. A trial step is accepted
// only if it does not decrease f; otherwise it is halved. The accepted values
// are therefore non-decreasing.
AscentResult maximize(const Objective& f, Eigen::VectorXd x0, const AscentOptions& options);

}  // namespace mcid
