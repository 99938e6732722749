#include "dgpinn/errors.hpp"
#include "dgpinn/optimizers.hpp"
#include "dgpinn/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace dgpinn;

namespace {

/// 1/2 x^T diag(d) x
Objective quadratic(Vector d) {
  return [d](const Vector& x, Vector& g) {
    g = d.cwiseProduct(x);
    return 0.5 * x.dot(g);
  };
}

double rosenbrock(const Vector& x, Vector& g) {
  const double a = 1 - x(0), b = x(1) - x(0) * x(0);
  g.resize(2);
  g(0) = -2 * a - 400 * x(0) * b;
  g(1) = 200 * b;
  return a * a + 100 * b * b;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesTheta) {
  Adam adam(3);
  Vector theta(3);
  theta << 1, -2, 3;
  const Vector before = theta;
  for (int k = 0; k < 5; ++k) adam.step(theta, Vector::Zero(3));
  EXPECT_EQ(theta, before);
}

TEST(Adam, FirstStepByHand) {
  Adam adam(1);
  Vector theta = Vector::Constant(1, 1.0);
  adam.step(theta, Vector::Constant(1, 1.0));
  // mhat = 1, vhat = 1 -> step = lr / (1 + eps)
  EXPECT_NEAR(theta(0), 1.0 - 1e-3 / (1.0 + 1e-8), 1e-16);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, ConvexQuadraticReducedSixOrders) {
  const Vector d = Vector::LinSpaced(10, 1, 10);
  const Objective f = quadratic(d);
  Vector theta = Vector::Ones(10), g;
  const double initial = f(theta, g);
  Adam adam(10);
  for (int k = 0; k < 5000; ++k) {
    f(theta, g);
    adam.step(theta, g);
  }
  EXPECT_LT(f(theta, g), 1e-6 * initial);
}

TEST(Adam, StepMagnitudeBounded) {
  Rng rng(1);
  Adam adam(20);
  Vector theta = Vector::Zero(20);
  Vector scale(20);
  for (Index i = 0; i < 20; ++i) scale(i) = std::exp(rng.uniform(-10, 10));
  for (int k = 0; k < 500; ++k) {
    Vector g(20);
    for (Index i = 0; i < 20; ++i) g(i) = scale(i) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const Vector before = theta;
    adam.step(theta, g);
    EXPECT_LE((theta - before).cwiseAbs().maxCoeff(), 1.1e-3);
  }
}

// A spike after many tiny gradients reaches the classic worst case
// lr (1 - b1) / sqrt(1 - b2) but never more.
TEST(Adam, SpikeStepBound) {
  Rng rng(2);
  Adam adam(20);
  Vector theta = Vector::Zero(20);
  const double bound = 1e-3 * 0.1 / std::sqrt(1e-3) * (1 + 1e-9);
  double largest = 0.0;
  for (int k = 0; k < 500; ++k) {
    Vector g(20);
    for (Index i = 0; i < 20; ++i) g(i) = std::exp(rng.uniform(-10, 10)) * (rng.uniform() - 0.5);
    const Vector before = theta;
    adam.step(theta, g);
    largest = std::max(largest, (theta - before).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(largest, bound);
  EXPECT_GT(largest, 1.1e-3);
}

TEST(Adam, Errors) {
  Adam adam(2);
  Vector theta = Vector::Zero(2);
  EXPECT_THROW(adam.step(theta, Vector::Zero(3)), ContractError);
  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(adam.step(theta, bad), NumericalError);
  EXPECT_THROW(Adam(2, AdamConfig{0.0}), ConfigError);
}

TEST(Lbfgs, IllConditionedQuadratic) {
  Vector d(2);
  d << 1, 10;
  for (double scale : {0.1, 1.0}) {
    LbfgsConfig cfg;
    cfg.step_scale = scale;
    cfg.gradient_tolerance = 0.0;
    cfg.relative_tolerance = 0.0;
    long reached = -1;
    const Objective f = quadratic(d);
    lbfgs_minimize(f, Vector::Ones(2), cfg, 10, [&](const LbfgsIteration& it, const Vector& x) {
      Vector g;
      f(x, g);
      if (reached < 0 && g.norm() < 1e-8) reached = it.iteration;
    });
    EXPECT_GT(reached, 0) << "step scale " << scale;
    EXPECT_LE(reached, 10);
  }
}

TEST(Lbfgs, Rosenbrock) {
  Vector x0(2);
  x0 << -1.2, 1.0;
  const LbfgsResult r = lbfgs_minimize(rosenbrock, x0, LbfgsConfig{}, 200);
  EXPECT_LT(r.loss, 1e-10);
  EXPECT_LE(r.iterations, 200);
  EXPECT_NEAR(r.x(0), 1.0, 1e-4);
}

TEST(Lbfgs, StationaryStartReturnsImmediately) {
  const LbfgsResult r = lbfgs_minimize(quadratic(Vector::Ones(3)), Vector::Zero(3), LbfgsConfig{}, 100);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.stop_reason, "gradient_tolerance");
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.loss, 0.0);
}

TEST(Lbfgs, MonotoneWithShortHistory) {
  const Vector d = Vector::LinSpaced(6, 1, 30);
  LbfgsConfig cfg;
  cfg.history = 1;
  cfg.step_scale = 1.0;
  std::vector<double> losses;
  Vector x0 = Vector::LinSpaced(6, -1, 1);
  const LbfgsResult r = lbfgs_minimize(quadratic(d), x0, cfg, 60,
                                       [&](const LbfgsIteration& it, const Vector&) {
                                         losses.push_back(it.loss);
                                       });
  for (std::size_t k = 1; k < losses.size(); ++k) EXPECT_LE(losses[k], losses[k - 1]);
  Vector g;
  EXPECT_LE(r.loss, quadratic(d)(x0, g));
}

TEST(Lbfgs, HistoryKeepsPositiveCurvature) {
  LbfgsHistory h;
  Vector s(2), y(2);
  s << 1, 0;
  y << -1, 0;
  EXPECT_FALSE(h.push(s, y, 5));
  y << 2, 0.5;
  EXPECT_TRUE(h.push(s, y, 5));
  for (int k = 0; k < 10; ++k) {
    s << 1 + k, 1;
    y << 2 + k, 3;
    h.push(s, y, 5);
  }
  EXPECT_EQ(h.size(), 5u);
  for (std::size_t k = 0; k < h.size(); ++k) EXPECT_GT(h.s[k].dot(h.y[k]), 0.0);
}

TEST(Lbfgs, BestLossNeverAboveInitial) {
  // A bumpy 1-d objective with a plateau-like region.
  const Objective f = [](const Vector& x, Vector& g) {
    g.resize(1);
    g(0) = std::cos(5 * x(0)) * 5 + 0.2 * x(0);
    return std::sin(5 * x(0)) + 0.1 * x(0) * x(0);
  };
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Vector x0 = Vector::Constant(1, rng.uniform(-5, 5));
    Vector g;
    const double start = f(x0, g);
    const LbfgsResult r = lbfgs_minimize(f, x0, LbfgsConfig{}, 50);
    EXPECT_LE(r.loss, start);
  }
}

TEST(Lbfgs, NonFiniteStartIsNumericalError) {
  const Objective f = [](const Vector& x, Vector& g) {
    g = x;
    return std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(lbfgs_minimize(f, Vector::Ones(2), LbfgsConfig{}, 10), NumericalError);
}

TEST(Lbfgs, RepeatedLineSearchFailureStops) {
  // The gradient points uphill, so no step can satisfy the sufficient decrease condition.
  const Objective f = [](const Vector& x, Vector& g) {
    g = -x;
    return 0.5 * x.squaredNorm();
  };
  const LbfgsResult r = lbfgs_minimize(f, Vector::Ones(2), LbfgsConfig{}, 100);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.stop_reason, "line_search_failures");
  ASSERT_FALSE(r.trace.empty());
  EXPECT_TRUE(r.trace.back().fallback);
  EXPECT_LE(r.loss, 1.0);
}

TEST(Lbfgs, Deterministic) {
  Vector x0(2);
  x0 << -1.2, 1.0;
  const LbfgsResult a = lbfgs_minimize(rosenbrock, x0, LbfgsConfig{}, 40);
  const LbfgsResult b = lbfgs_minimize(rosenbrock, x0, LbfgsConfig{}, 40);
  EXPECT_TRUE((a.x.array() == b.x.array()).all());
  EXPECT_EQ(a.evaluations, b.evaluations);
}
