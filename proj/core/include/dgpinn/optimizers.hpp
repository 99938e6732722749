#pragma once

#include "dgpinn/tape.hpp"

#include <deque>
#include <functional>
#include <string>
#include <vector>

namespace dgpinn {

/// Loss at x; writes the gradient into `grad` (resized by the callee).
using Objective = std::function<double(const Vector& x, Vector& grad)>;

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam on a flat parameter vector.
class Adam {
 public:
  Adam(Index size, AdamConfig config = {});

  /// theta -= lr * mhat / (sqrt(vhat) + eps). Throws NumericalError on a
  /// non-finite gradient and ContractError on a length mismatch.
  void step(Vector& theta, const Vector& grad);

  long steps() const noexcept { return steps_; }
  const Vector& first_moment() const noexcept { return m_; }
  const Vector& second_moment() const noexcept { return v_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  Vector m_;
  Vector v_;
  long steps_ = 0;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
};

struct LbfgsConfig {
  int history = 50;
  /// Global multiplier on the trial step.
  double step_scale = 0.1;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 25;
  double gradient_tolerance = 1e-9;  // max-norm
  double relative_tolerance = 1e-15;
  int max_consecutive_failures = 5;
  double fallback_factor = 1e-3;
};

struct LbfgsIteration {
  long iteration = 0;  // 1-based
  double loss = 0.0;
  double step = 0.0;   // accepted line-search factor (fallback: step length)
  int evaluations = 0;
  bool fallback = false;
};

struct LbfgsResult {
  Vector x;            // best point seen
  double loss = 0.0;   // loss at x
  long iterations = 0;
  long evaluations = 0;
  bool converged = true;
  std::string stop_reason;
  std::vector<LbfgsIteration> trace;
};

/// Called after every outer iteration with the current (not necessarily best)
/// iterate.
using LbfgsCallback = std::function<void(const LbfgsIteration&, const Vector& x)>;

/// Limited-memory BFGS with a strong-Wolfe line search.
///
/// Stops after max_iterations outer iterations, when the gradient max-norm
/// drops below gradient_tolerance, or when the relative loss change falls
/// below relative_tolerance. A failed line search falls back to a steepest
/// descent step; max_consecutive_failures in a row end the run with
/// converged = false.
LbfgsResult lbfgs_minimize(const Objective& objective, Vector x0, const LbfgsConfig& config,
                           long max_iterations, const LbfgsCallback& callback = {});

/// The (s, y) history; exposed for tests of the curvature invariant.
struct LbfgsHistory {
  std::deque<Vector> s;
  std::deque<Vector> y;
  std::deque<double> rho;

  /// Two-loop recursion: approximate inverse Hessian times g.
  Vector apply_inverse(const Vector& g) const;
  /// Stores the pair if s.y clears the curvature floor; returns whether it did.
  bool push(Vector s_k, Vector y_k, std::size_t capacity);
  std::size_t size() const noexcept { return s.size(); }
};

}  // namespace dgpinn
