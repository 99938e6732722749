#include "dgpinn/errors.hpp"
#include "dgpinn/problems.hpp"
#include "dgpinn/random.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dgpinn;

namespace {

constexpr double kPi = std::numbers::pi;

Vector pt2(double x, double t) {
  Vector p(2);
  p << x, t;
  return p;
}

Vector pt3(double x, double y, double t) {
  Vector p(3);
  p << x, y, t;
  return p;
}

std::vector<double> eval_residual(const ProblemSpec& problem, const DerivValues& d,
                                  const Vector& gamma) {
  const std::vector<double> g(gamma.data(), gamma.data() + gamma.size());
  return residual<double>(problem, d, g);
}

}  // namespace

TEST(PdeSuite, HeatExactSolutionAnnihilates) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  EXPECT_DOUBLE_EQ(heat.true_unknowns(0), 1.0 / 400.0);
  const auto r = eval_residual(heat, oracle::exact_partials(ProblemId::heat, pt2(0.3, 0.2)),
                               heat.true_unknowns);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 0.0, 1e-12);
}

TEST(PdeSuite, WaveArithmetic) {
  const ProblemSpec wave = make_problem(ProblemId::wave);
  DerivValues d;
  d.insert({0, 1, 2}, 4.0);
  d.insert({0, 0, 2}, 1.0);
  d.insert({0, 0, 0}, 0.0);
  d.insert({0, 1, 1}, 0.0);
  d.insert({0, 0, 1}, 0.0);
  EXPECT_EQ(eval_residual(wave, d, Vector::Constant(1, 4.0))[0], 0.0);
}

TEST(PdeSuite, TaylorGreenAnnihilates) {
  const ProblemSpec ns = make_problem(ProblemId::navier_stokes);
  Vector gamma(2);
  gamma << 1.0, 0.01;
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vector p = oracle::interior_point(ns, rng);
    const auto r = eval_residual(ns, oracle::exact_partials(ProblemId::navier_stokes, p), gamma);
    ASSERT_EQ(r.size(), 3u);
    for (double v : r) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

// The convective term of the vortex is a pure gradient, so scaling the
// pressure with beta1 leaves every residual at zero. Without pressure data
// beta1 cannot be recovered from this flow.
TEST(PdeSuite, TaylorGreenBeta1TradesAgainstPressure) {
  const ProblemSpec ns = make_problem(ProblemId::navier_stokes);
  Rng rng(5);
  for (double beta1 : {0.0, 0.3, 2.5}) {
    Vector gamma(2);
    gamma << beta1, 0.01;
    for (int k = 0; k < 20; ++k) {
      const Vector x = oracle::interior_point(ns, rng);
      DerivValues scaled;
      for (const auto& [p, v] : oracle::exact_partials(ProblemId::navier_stokes, x)) {
        scaled.insert(p, p.output == 2 ? beta1 * v : v);
      }
      for (double r : eval_residual(ns, scaled, gamma)) EXPECT_NEAR(r, 0.0, 1e-12);
    }
  }
}

TEST(PdeSuite, MissingEntryIsContractError) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  DerivValues d;
  d.insert({0, 1, 1}, 1.0);
  EXPECT_THROW(eval_residual(heat, d, Vector::Ones(1)), ContractError);
}

TEST(PdeSuite, AnalyticPointValues) {
  EXPECT_NEAR(analytic_solution(make_problem(ProblemId::heat), pt2(0.05, 0))(0), 1.0, 1e-15);
  EXPECT_NEAR(analytic_solution(make_problem(ProblemId::wave), pt2(0.5, 0))(0), 1.0, 1e-15);
  const ProblemSpec beam = make_problem(ProblemId::beam);
  EXPECT_NEAR(analytic_solution(beam, pt2(0.5, 0))(0), 1.0, 1e-15);
  EXPECT_NEAR(analytic_solution(beam, pt2(0.5, 0.3))(0), std::cos(kPi * kPi * 0.3), 1e-15);
  EXPECT_THROW(analytic_solution(make_problem(ProblemId::navier_stokes, true), pt3(2, 0, 1)),
               ContractError);
}

TEST(PdeSuite, AnalyticMatchesOracle) {
  Rng rng(2);
  for (ProblemId id : {ProblemId::heat, ProblemId::wave, ProblemId::beam, ProblemId::navier_stokes}) {
    const ProblemSpec p = make_problem(id);
    for (int k = 0; k < 20; ++k) {
      const Vector x = oracle::interior_point(p, rng, 0.0);
      const Vector u = analytic_solution(p, x);
      const DerivValues ref = oracle::exact_partials(id, x);
      for (int c = 0; c < p.output_dim(); ++c) EXPECT_NEAR(u(c), ref.value(c), 1e-14);
    }
  }
}

TEST(PdeSuite, TaylorGreenPlugIn) {
  auto a = taylor_green(pt3(0, 0, 0), 0.01);
  EXPECT_NEAR(a[0], 0.0, 1e-16);
  EXPECT_NEAR(a[1], 0.0, 1e-16);
  EXPECT_NEAR(a[2], -0.5, 1e-16);
  auto b = taylor_green(pt3(kPi / 2, 0, 0), 0.01);
  EXPECT_NEAR(b[0], 0.0, 1e-16);
  EXPECT_NEAR(b[1], 1.0, 1e-16);
  EXPECT_NEAR(b[2], 0.0, 1e-16);
}

TEST(PdeSuite, ConditionCounts) {
  auto count = [](ProblemId id) {
    const ProblemSpec p = make_problem(id);
    return std::pair{p.initial_conditions.size(), p.boundary_conditions.size()};
  };
  EXPECT_EQ(count(ProblemId::heat), (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(count(ProblemId::wave), (std::pair<std::size_t, std::size_t>{2, 1}));
  EXPECT_EQ(count(ProblemId::beam), (std::pair<std::size_t, std::size_t>{2, 2}));
  EXPECT_EQ(count(ProblemId::navier_stokes), (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(PdeSuite, ConditionTargets) {
  const auto heat_ic = ic_values(make_problem(ProblemId::heat), pt2(0.05, 0));
  ASSERT_EQ(heat_ic.size(), 1u);
  EXPECT_NEAR(heat_ic[0].second, 1.0, 1e-15);

  const auto wave_ic = ic_values(make_problem(ProblemId::wave), pt2(0.37, 0));
  ASSERT_EQ(wave_ic.size(), 2u);
  EXPECT_EQ(wave_ic[1].second, 0.0);

  const auto beam_bc = bc_values(make_problem(ProblemId::beam), pt2(0, 0.4));
  ASSERT_EQ(beam_bc.size(), 2u);
  EXPECT_EQ(beam_bc[1].first, "b2");
  EXPECT_EQ(beam_bc[1].second, 0.0);

  EXPECT_THROW(ic_values(make_problem(ProblemId::heat), pt2(0.3, 0.2)), ContractError);
  EXPECT_THROW(bc_values(make_problem(ProblemId::heat), pt2(0.3, 0.2)), ContractError);
}

TEST(PdeSuite, AnalyticSolutionsSatisfyConditions) {
  Rng rng(3);
  for (ProblemId id : {ProblemId::heat, ProblemId::wave, ProblemId::beam}) {
    const ProblemSpec p = make_problem(id);
    for (int k = 0; k < 100; ++k) {
      const Vector ic_pt = pt2(rng.uniform(), 0.0);
      const DerivValues d0 = oracle::exact_partials(id, ic_pt);
      for (const auto& op : p.initial_conditions) {
        EXPECT_NEAR(d0.at(op.partial), op.target(ic_pt), 1e-12) << op.term_id;
      }
      const Vector bc_pt = pt2(k % 2 ? 1.0 : 0.0, rng.uniform());
      const DerivValues d1 = oracle::exact_partials(id, bc_pt);
      for (const auto& op : p.boundary_conditions) {
        // The reference second derivative carries pi^2 |u|; allow for sin(pi) rounding.
        EXPECT_NEAR(d1.at(op.partial), op.target(bc_pt), 1e-12 * (1 + 1000 * (op.partial.order > 0)))
            << op.term_id;
      }
    }
  }
}

TEST(PdeSuite, ParseNames) {
  EXPECT_EQ(parse_problem("navier_stokes_2d"), ProblemId::navier_stokes);
  EXPECT_EQ(parse_problem("ns"), ProblemId::navier_stokes);
  EXPECT_EQ(to_string(ProblemId::beam), "beam");
  EXPECT_THROW(parse_problem("poisson"), ConfigError);
}

TEST(PdeSuite, TermIdsCanonicalOrder) {
  EXPECT_EQ(make_problem(ProblemId::beam).term_ids(),
            (std::vector<std::string>{"r", "i1", "i2", "b1", "b2", "d"}));
  EXPECT_EQ(make_problem(ProblemId::navier_stokes).term_ids(),
            (std::vector<std::string>{"r1", "r2", "r3", "d1", "d2"}));
}
