#include "dgpinn/errors.hpp"
#include "dgpinn/random.hpp"
#include "dgpinn/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace dgpinn;

namespace {

std::set<Index> as_set(const std::vector<Index>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Grid, NodesAndSpacing) {
  const GridSpec g{{0, 0}, {1, 2}, {3, 5}};
  EXPECT_EQ(g.node_count(), 15);
  EXPECT_DOUBLE_EQ(g.spacing(1), 0.5);
  const Vector last = g.node(14);
  EXPECT_EQ(last(0), 1.0);
  EXPECT_EQ(last(1), 2.0);
  // Last dimension runs fastest.
  EXPECT_EQ(g.node(1)(1), 0.5);
  EXPECT_EQ(g.coordinate_index(7, 0), 1);
  EXPECT_EQ(g.coordinate_index(7, 1), 2);
  EXPECT_THROW((GridSpec{{0}, {1}, {1}}.validate()), ConfigError);
  EXPECT_THROW((GridSpec{{1}, {0}, {5}}.validate()), ConfigError);
}

TEST(Sampling, HeatDefaultsLeaveTestComplement) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const DatasetBundle b = build_bundle(heat, default_grid(heat), SampleCounts{}, 0);
  EXPECT_EQ(b.data.size(), 10000);
  EXPECT_EQ(b.test.size(), 201 * 201 - 10000);
  EXPECT_EQ(b.test.size(), 30401);
  EXPECT_EQ(b.residual.size(), 2000);
  EXPECT_EQ(b.initial.size(), 100);
  EXPECT_EQ(b.boundary.size(), 200);
  EXPECT_EQ(b.test_truth.cols(), b.test.size());
}

TEST(Sampling, ManifoldMembership) {
  const ProblemSpec wave = make_problem(ProblemId::wave);
  const DatasetBundle b = build_bundle(wave, default_grid(wave), SampleCounts{}, 4);
  for (Index k = 0; k < b.initial.size(); ++k) EXPECT_EQ(b.initial.points(1, k), 0.0);
  for (Index k = 0; k < b.boundary.size(); ++k) {
    const double x = b.boundary.points(0, k);
    EXPECT_TRUE(x == 0.0 || x == 1.0);
  }
  // Initial targets follow the operators: displacement then velocity.
  ASSERT_EQ(b.initial.targets.rows(), 2);
  for (Index k = 0; k < b.initial.size(); ++k) {
    const double x = b.initial.points(0, k);
    EXPECT_NEAR(b.initial.targets(0, k), std::sin(M_PI * x) + 0.5 * std::sin(4 * M_PI * x), 1e-15);
    EXPECT_EQ(b.initial.targets(1, k), 0.0);
  }
}

TEST(Sampling, NavierStokesResidualIsInterior) {
  const ProblemSpec ns = make_problem(ProblemId::navier_stokes);
  const GridSpec grid = default_grid(ns);
  EXPECT_EQ(grid.counts, (std::vector<int>{41, 41, 21}));
  const DatasetBundle b = build_bundle(ns, grid, SampleCounts{500, 0, 0, 1000}, 2);
  for (Index k = 0; k < b.residual.size(); ++k) {
    for (int d : ns.spatial_inputs()) {
      const double v = b.residual.points(d, k);
      EXPECT_GT(v, grid.lower[d]);
      EXPECT_LT(v, grid.upper[d]);
    }
  }
  EXPECT_EQ(b.data.targets.rows(), 2);
  EXPECT_EQ(b.test_truth.rows(), 3);
}

TEST(Sampling, Deterministic) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const GridSpec grid{{0, 0}, {1, 1}, {31, 31}};
  const SampleCounts counts{50, 10, 10, 100};
  const DatasetBundle a = build_bundle(heat, grid, counts, 9);
  const DatasetBundle b = build_bundle(heat, grid, counts, 9);
  const DatasetBundle c = build_bundle(heat, grid, counts, 10);
  EXPECT_EQ(a.data.nodes, b.data.nodes);
  EXPECT_EQ(a.residual.nodes, b.residual.nodes);
  EXPECT_NE(a.data.nodes, c.data.nodes);
}

TEST(Sampling, DataTestDisjoint) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const GridSpec grid{{0, 0}, {1, 1}, {25, 25}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DatasetBundle b = build_bundle(heat, grid, SampleCounts{20, 5, 5, 300}, seed);
    const auto data = as_set(b.data.nodes);
    const auto test = as_set(b.test.nodes);
    EXPECT_EQ(data.size(), 300u);
    EXPECT_EQ(data.size() + test.size(), 625u);
    for (Index n : data) EXPECT_EQ(test.count(n), 0u);
  }
}

TEST(Sampling, CountAbovePopulation) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const GridSpec grid{{0, 0}, {1, 1}, {5, 5}};
  EXPECT_THROW(build_bundle(heat, grid, SampleCounts{5, 6, 2, 5}, 0), ConfigError);
  EXPECT_THROW(build_bundle(heat, grid, SampleCounts{5, 2, 2, 26}, 0), ConfigError);
}

TEST(Sampling, WithoutReplacementUniform) {
  // Chi-square goodness of fit, 24 degrees of freedom; 1% critical value 42.98.
  constexpr int cells = 25, trials = 1000;
  std::vector<int> hits(cells, 0);
  for (int s = 0; s < trials; ++s) ++hits[sample_without_replacement(cells, 1, s)[0]];
  const double expected = double(trials) / cells;
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - expected) * (h - expected) / expected;
  EXPECT_LT(chi2, 42.98);

  const auto all = sample_without_replacement(10, 10, 3);
  EXPECT_EQ(as_set(all).size(), 10u);
}

TEST(Sampling, SelectedDataNodeUniformOverGrid) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const GridSpec grid{{0, 0}, {1, 1}, {5, 5}};
  std::vector<int> hits(25, 0);
  for (int s = 0; s < 1000; ++s) {
    ++hits[build_bundle(heat, grid, SampleCounts{1, 1, 1, 1}, s).data.nodes[0]];
  }
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - 40.0) * (h - 40.0) / 40.0;
  EXPECT_LT(chi2, 42.98);
}

TEST(Noise, InfiniteSnrIsIdentity) {
  const Vector v = Vector::LinSpaced(10, -1, 1);
  EXPECT_EQ(add_noise(v, kNoNoise, 1), v);
}

TEST(Noise, ZeroDbOnUnitPower) {
  const Vector ones = Vector::Ones(200000);
  const Vector noisy = add_noise(ones, 0.0, 5);
  const Vector n = noisy - ones;
  const double var = n.squaredNorm() / n.size();
  EXPECT_NEAR(var, 1.0, 0.01);
  EXPECT_NEAR(n.mean(), 0.0, 0.01);
}

TEST(Noise, MeasuredSnrOnHeatField) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const Observations obs = observe_on_grid(heat, default_grid(heat));
  const Vector clean = obs.clean.row(0).transpose();
  ASSERT_EQ(clean.size(), 40401);
  const Vector noisy = add_noise(clean, 25.0, 0);
  const double measured = 10 * std::log10(clean.squaredNorm() / (noisy - clean).squaredNorm());
  EXPECT_GE(measured, 24.5);
  EXPECT_LE(measured, 25.5);
}

TEST(Noise, ErrorsAndDeterminism) {
  EXPECT_THROW(add_noise(Vector::Zero(5), 20.0, 0), ContractError);
  EXPECT_THROW(add_noise(Vector(), 20.0, 0), ContractError);
  const Vector v = Vector::LinSpaced(50, 0.5, 2);
  EXPECT_EQ(add_noise(v, 30, 7), add_noise(v, 30, 7));
  EXPECT_NE(add_noise(v, 30, 7), add_noise(v, 30, 8));
}

TEST(Noise, AppliedBeforeSubsampling) {
  const ProblemSpec heat = make_problem(ProblemId::heat);
  const GridSpec grid{{0, 0}, {1, 1}, {21, 21}};
  Observations obs = observe_on_grid(heat, grid);
  corrupt(obs, 25.0, 3);
  const DatasetBundle b = build_bundle(heat, grid, SampleCounts{10, 5, 5, 100}, 1, 25.0, 3);
  for (Index k = 0; k < b.data.size(); ++k) {
    EXPECT_EQ(b.data.targets(0, k), obs.observed(0, b.data.nodes[k]));
  }
  for (Index k = 0; k < b.test.size(); ++k) {
    EXPECT_EQ(b.test.targets(0, k), obs.observed(0, b.test.nodes[k]));
    EXPECT_EQ(b.test_truth(0, k), obs.clean(0, b.test.nodes[k]));
  }
}

TEST(FlowColumns, ReadsAndRejects) {
  const auto dir = std::filesystem::temp_directory_path() / "dgpinn_flow_columns";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "ok.txt");
    f << "# x y t u v p\n1 2 0 0.1 0.2 0.3\n\n1.5 -1 0.5 0.4 0.5 0.6\n";
  }
  const Observations obs = load_flow_columns(dir / "ok.txt");
  EXPECT_EQ(obs.points.cols(), 2);
  EXPECT_EQ(obs.points(1, 1), -1.0);
  EXPECT_EQ(obs.clean(2, 1), 0.6);
  EXPECT_EQ(obs.observed.rows(), 2);
  {
    std::ofstream f(dir / "bad.txt");
    f << "1 2 3 4 5\n";
  }
  EXPECT_THROW(load_flow_columns(dir / "bad.txt"), ConfigError);
  EXPECT_THROW(load_flow_columns(dir / "missing.txt"), ConfigError);
}
