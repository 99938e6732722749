#include "dgpinn/errors.hpp"
#include "dgpinn/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dgpinn {

namespace {

constexpr double kCurvatureFloor = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Trial {
  double alpha = 0.0;
  double f = kInf;
  double slope = 0.0;  // directional derivative
  Vector x;
  Vector g;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), clamped to
// [lo, hi]; falls back to bisection when the cubic has no real minimizer.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db, double lo,
                       double hi) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc >= 0.0 && std::isfinite(disc)) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double t = b - (b - a) * ((db + d2 - d1) / (db - da + 2.0 * d2));
    if (std::isfinite(t)) return std::clamp(t, lo, hi);
  }
  return 0.5 * (lo + hi);
}

class LineSearch {
 public:
  LineSearch(const Objective& objective, const LbfgsConfig& config, const Vector& x0, double f0,
             const Vector& g0, const Vector& direction)
      : objective_(objective), config_(config), x0_(x0), f0_(f0), direction_(direction) {
    slope0_ = g0.dot(direction);
  }

  // Returns true and fills `out` on a strong-Wolfe point.
  bool run(double alpha, Trial& out) {
    if (!(slope0_ < 0.0)) return false;
    Trial prev{0.0, f0_, slope0_, {}, {}};
    for (int i = 0; evaluations_ < config_.max_line_search; ++i) {
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur, out);
      if (std::abs(cur.slope) <= -config_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      const double lo = cur.alpha + 0.01 * (cur.alpha - prev.alpha);
      const double hi = 10.0 * cur.alpha;
      alpha = cubic_minimizer(prev.alpha, prev.f, prev.slope, cur.alpha, cur.f, cur.slope, lo, hi);
      prev = std::move(cur);
    }
    return false;
  }

  int evaluations() const noexcept { return evaluations_; }

 private:
  Trial evaluate(double alpha) {
    ++evaluations_;
    Trial t;
    t.alpha = alpha;
    t.x = x0_ + alpha * direction_;
    t.f = objective_(t.x, t.g);
    if (!std::isfinite(t.f) || !t.g.allFinite()) {
      t.f = kInf;
      t.slope = kInf;
    } else {
      t.slope = t.g.dot(direction_);
    }
    return t;
  }

  bool armijo(const Trial& t) const { return t.f <= f0_ + config_.c1 * t.alpha * slope0_; }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    while (evaluations_ < config_.max_line_search) {
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      if (b - a < 1e-16 * std::max(1.0, b)) return false;
      const double margin = 0.1 * (b - a);
      double alpha;
      if (std::isfinite(hi.f)) {
        alpha = cubic_minimizer(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope, a + margin,
                                b - margin);
      } else {
        alpha = 0.5 * (a + b);
      }
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -config_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& objective_;
  const LbfgsConfig& config_;
  const Vector& x0_;
  double f0_;
  const Vector& direction_;
  double slope0_ = 0.0;
  int evaluations_ = 0;
};

void validate(const LbfgsConfig& c) {
  if (c.history < 1) throw ConfigError("L-BFGS history must be at least 1");
  if (!(c.step_scale > 0.0)) throw ConfigError("L-BFGS step scale must be positive");
  if (!(0.0 < c.c1 && c.c1 < c.c2 && c.c2 < 1.0)) {
    throw ConfigError("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  if (c.max_line_search < 1 || c.max_consecutive_failures < 1) {
    throw ConfigError("L-BFGS trial limits must be positive");
  }
}

}  // namespace

Vector LbfgsHistory::apply_inverse(const Vector& g) const {
  Vector q = g;
  const std::size_t m = s.size();
  std::vector<double> alpha(m);
  for (std::size_t i = m; i-- > 0;) {
    alpha[i] = rho[i] * s[i].dot(q);
    q -= alpha[i] * y[i];
  }
  if (m > 0) q *= s.back().dot(y.back()) / y.back().squaredNorm();
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho[i] * y[i].dot(q);
    q += (alpha[i] - beta) * s[i];
  }
  return q;
}

bool LbfgsHistory::push(Vector s_k, Vector y_k, std::size_t capacity) {
  const double sy = s_k.dot(y_k);
  if (!(sy > kCurvatureFloor * s_k.norm() * y_k.norm())) return false;
  if (s.size() == capacity) {
    s.pop_front();
    y.pop_front();
    rho.pop_front();
  }
  rho.push_back(1.0 / sy);
  s.push_back(std::move(s_k));
  y.push_back(std::move(y_k));
  return true;
}

LbfgsResult lbfgs_minimize(const Objective& objective, Vector x0, const LbfgsConfig& config,
                           long max_iterations, const LbfgsCallback& callback) {
  validate(config);
  if (max_iterations < 0) throw ConfigError("L-BFGS iteration budget must be non-negative");

  LbfgsResult result;
  Vector x = std::move(x0);
  Vector g;
  double f = objective(x, g);
  result.evaluations = 1;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw NumericalError("L-BFGS: loss or gradient is not finite at the starting point");
  }
  result.x = x;
  result.loss = f;

  LbfgsHistory history;
  int failures = 0;
  bool first = true;
  result.stop_reason = "max_iterations";
  for (long it = 1; it <= max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) {
      result.stop_reason = "gradient_tolerance";
      break;
    }
    Vector direction = -history.apply_inverse(g);
    if (!(direction.dot(g) < 0.0)) {
      history = {};
      direction = -g;
    }
    double alpha = config.step_scale;
    if (first) alpha *= std::min(1.0, 1.0 / g.lpNorm<1>());

    LineSearch search(objective, config, x, f, g, direction);
    Trial accepted;
    LbfgsIteration record;
    record.iteration = it;
    const bool ok = search.run(alpha, accepted);
    record.evaluations = search.evaluations();
    Vector x_new;
    Vector g_new;
    double f_new;
    if (ok) {
      failures = 0;
      first = false;
      x_new = std::move(accepted.x);
      g_new = std::move(accepted.g);
      f_new = accepted.f;
      record.step = accepted.alpha;
    } else {
      ++failures;
      record.fallback = true;
      const double length = config.step_scale * config.fallback_factor;
      x_new = x - (length / g.norm()) * g;
      f_new = objective(x_new, g_new);
      ++record.evaluations;
      record.step = length;
      history = {};
      first = true;
      if (!std::isfinite(f_new) || !g_new.allFinite()) {
        result.evaluations += record.evaluations;
        result.converged = false;
        result.stop_reason = "non_finite";
        break;
      }
    }
    result.evaluations += record.evaluations;
    if (ok) history.push(x_new - x, g_new - g, static_cast<std::size_t>(config.history));
    const double change = std::abs(f_new - f);
    const double scale = std::max({std::abs(f), std::abs(f_new), std::numeric_limits<double>::min()});
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    record.loss = f;
    result.iterations = it;
    result.trace.push_back(record);
    if (f < result.loss) {
      result.loss = f;
      result.x = x;
    }
    if (callback) callback(record, x);
    if (failures >= config.max_consecutive_failures) {
      result.converged = false;
      result.stop_reason = "line_search_failures";
      break;
    }
    if (ok && change / scale < config.relative_tolerance) {
      result.stop_reason = "relative_tolerance";
      break;
    }
  }
  if (result.stop_reason == "max_iterations" &&
      g.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) {
    result.stop_reason = "gradient_tolerance";
  }
  return result;
}

}  // namespace dgpinn
