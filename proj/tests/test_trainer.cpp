#include "dgpinn/errors.hpp"
#include "dgpinn/reporting.hpp"
#include "dgpinn/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace dgpinn;

namespace {

TrainConfig small_config(ProblemId id = ProblemId::heat) {
  TrainConfig c = default_config(id);
  c.hidden_layers = 2;
  c.hidden_width = 16;
  c.grid = id == ProblemId::navier_stokes ? std::vector<int>{13, 13, 6} : std::vector<int>{41, 41};
  c.counts = SampleCounts{150, 20, 30, 400};
  c.m1 = 200;
  c.m2 = 40;
  c.weight_cadence = 60;
  return c;
}

}  // namespace

TEST(Trainer, PretrainLeavesGammaAndReducesDataLoss) {
  const TrainConfig c = small_config();
  const ProblemSpec p = problem_for(c);
  const DatasetBundle b = prepare_dataset(c, p);
  TrainableState s{init_network(c.layer_widths(), network_seed(c)), init_inverse(p, unknowns_seed(c))};
  const Vector gamma = s.unknowns.values;
  const double before = data_loss(s, p, b.data)[0];
  RunReport report;
  pretrain(c, p, b, s, report);
  EXPECT_TRUE((s.unknowns.values.array() == gamma.array()).all());
  EXPECT_LE(data_loss(s, p, b.data)[0], before);
  EXPECT_EQ(report.adam_iterations, c.m1);
  for (const auto& row : report.loss_trace) EXPECT_EQ(row.phase, "adam");
}

TEST(Trainer, DgPinnComputesWeightsOnce) {
  const TrainResult r = train(small_config());
  EXPECT_TRUE(r.report.converged) << r.report.failure;
  ASSERT_EQ(r.report.trace_reports.size(), 1u);
  EXPECT_EQ(r.report.trace_reports[0].phase, "finetune");
  EXPECT_EQ(r.report.weights, r.report.trace_reports[0].weights());
  EXPECT_LE(r.report.lbfgs_iterations, 40);
  EXPECT_EQ(r.report.metrics.unknowns, std::vector<std::string>{"beta_sq"});
  EXPECT_EQ(r.report.metrics.rt.size(), 1u);
}

TEST(Trainer, BaselineRecomputesWeightsOnCadence) {
  TrainConfig c = small_config();
  c.mode = TrainMode::pinn_baseline;
  const TrainResult r = train(c);
  EXPECT_TRUE(r.report.converged) << r.report.failure;
  // ceil(200 / 60)
  EXPECT_EQ(r.report.trace_reports.size(), 4u);
  EXPECT_EQ(r.report.trace_reports[1].iteration, 60);
  EXPECT_EQ(r.report.weights, r.report.trace_reports.back().weights());
}

TEST(Trainer, IdenticalSeedsIdenticalReports) {
  TrainConfig c = small_config(ProblemId::wave);
  c.m1 = 60;
  c.m2 = 15;
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  EXPECT_EQ(strip_timing(report_json(a.report)), strip_timing(report_json(b.report)));
  EXPECT_TRUE((a.state.flatten().array() == b.state.flatten().array()).all());
}

TEST(Trainer, CheckpointReproducesMetrics) {
  TrainConfig c = small_config(ProblemId::navier_stokes);
  c.m1 = 60;
  c.m2 = 10;
  c.counts = SampleCounts{100, 0, 0, 300};
  const TrainResult r = train(c);
  const auto dir = std::filesystem::temp_directory_path() / "dgpinn_trainer_ckpt";
  std::filesystem::remove_all(dir);
  write_run_directory(dir, r);
  for (const char* f : {kReportFile, kTraceFile, kConfigFile, kCheckpointFile}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const TestMetrics m = evaluate_run_directory(dir);
  ASSERT_EQ(m.rt.size(), r.report.metrics.rt.size());
  for (std::size_t k = 0; k < m.rt.size(); ++k) {
    EXPECT_LE(std::abs(m.rt[k] - r.report.metrics.rt[k]), 1e-12 * r.report.metrics.rt[k]);
  }
  for (std::size_t k = 0; k < m.ape.size(); ++k) {
    EXPECT_LE(std::abs(m.ape[k] - r.report.metrics.ape[k]), 1e-12 * r.report.metrics.ape[k]);
  }
  TrainConfig wrong = c;
  wrong.problem = ProblemId::heat;
  wrong.grid.clear();
  EXPECT_THROW(evaluate_checkpoint(dir / kCheckpointFile, wrong), ConfigError);
}

TEST(Trainer, DivergenceGivesPartialReport) {
  TrainConfig c = small_config();
  c.m1 = 50;
  c.adam_lr = 1e200;
  const TrainResult r = train(c);
  EXPECT_FALSE(r.report.converged);
  EXPECT_FALSE(r.report.failure.empty());
}

TEST(Trainer, ConfigErrorsThrow) {
  TrainConfig c = small_config();
  c.m1 = 0;
  EXPECT_THROW(train(c), ConfigError);
  c = small_config();
  c.counts.data = 41 * 41 + 1;
  EXPECT_THROW(train(c), ConfigError);
}

TEST(Trainer, DgPinnCheaperThanBaselineAtMatchedBudget) {
  TrainConfig c = small_config();
  c.m2 = 20;
  const TrainResult dg = train(c);
  c.mode = TrainMode::pinn_baseline;
  const TrainResult base = train(c);
  EXPECT_LT(dg.report.phase_seconds.at("adam"), base.report.phase_seconds.at("adam"));
}
