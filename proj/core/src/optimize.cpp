#include "mcid/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace mcid {

namespace {

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Two-loop recursion for ascent: returns H * g where H approximates the inverse
// of the negated Hessian.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Pair>& memory) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q -= alpha[i] * memory[i].y;
  }
  const Pair& last = memory.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q += (alpha[i] - beta) * memory[i].s;
  }
  return q;
}

AscentResult ascend(const Objective& f, Eigen::VectorXd x0, const AscentOptions& options) {
  const Eigen::Index n = x0.size();
  auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.setZero(n);
    return f(x, g);
  };

  AscentResult result;
  result.x = std::move(x0);
  Eigen::VectorXd g;
  result.value = evaluate(result.x, g);
  if (!std::isfinite(result.value)) {
    result.grad_norm = std::numeric_limits<double>::infinity();
    return result;
  }
  result.trace.push_back(result.value);

  std::deque<Pair> memory;
  Eigen::VectorXd x_new, g_new;
  int stalls = 0;
  for (int iter = 0; iter < options.max_iters; ++iter) {
    if (n == 0 || g.lpNorm<Eigen::Infinity>() < options.tol) break;

    Eigen::VectorXd direction;
    if (!memory.empty()) {
      direction = lbfgs_direction(g, memory);
      if (!(direction.dot(g) > 0.0)) memory.clear();
    }
    if (memory.empty()) direction = g * (options.step_size / g.norm());

    bool accepted = false;
    double v_new = 0.0;
    double step = 1.0;
    for (int h = 0; h <= options.max_halvings; ++h) {
      x_new = result.x + step * direction;
      v_new = evaluate(x_new, g_new);
      if (std::isfinite(v_new) && v_new >= result.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (memory.empty()) break;  // even a short gradient step fails
      memory.clear();
      continue;
    }

    // For ascent the curvature pair uses y = g_old - g_new.
    Pair pair{x_new - result.x, g - g_new, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }
    // Accepted but flat steps mean rounding dominates; give up after a few.
    stalls = v_new == result.value ? stalls + 1 : 0;
    result.x = x_new;
    result.value = v_new;
    g = g_new;
    result.iterations = iter + 1;
    result.trace.push_back(v_new);
    if (stalls >= 3) break;
  }
  result.grad_norm = n == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
  result.converged = result.grad_norm < options.tol;
  return result;
}

}  // namespace

AscentResult maximize(const Objective& f, Eigen::VectorXd x0, const AscentOptions& options) {
  if (options.max_iters < 1 || !(options.tol > 0.0) || !(options.step_size > 0.0)) {
    throw std::invalid_argument("maximize: need max_iters >= 1, tol > 0 and step_size > 0");
  }
  if (!options.frozen.empty() && options.frozen.size() != static_cast<std::size_t>(x0.size())) {
    throw std::invalid_argument("maximize: frozen mask has the wrong length");
  }
  if (std::find(options.frozen.begin(), options.frozen.end(), true) == options.frozen.end()) {
    return ascend(f, std::move(x0), options);
  }

  // Optimize over the free coordinates only; frozen ones may be infinite.
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    if (!options.frozen[static_cast<std::size_t>(i)]) free.push_back(i);
  }
  const auto k_free = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd full = x0;
  Eigen::VectorXd full_grad(x0.size());
  const Objective reduced = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
    for (Eigen::Index k = 0; k < k_free; ++k) full(free[k]) = z(k);
    full_grad.setZero();
    const double v = f(full, full_grad);
    for (Eigen::Index k = 0; k < k_free; ++k) g(k) = full_grad(free[k]);
    return v;
  };
  Eigen::VectorXd z0(k_free);
  for (Eigen::Index k = 0; k < k_free; ++k) z0(k) = x0(free[k]);

  AscentResult result = ascend(reduced, std::move(z0), options);
  Eigen::VectorXd x = std::move(x0);
  for (Eigen::Index k = 0; k < k_free; ++k) x(free[k]) = result.x(k);
  result.x = std::move(x);
  return result;
}

}  // namespace mcid
