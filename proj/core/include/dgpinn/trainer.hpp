#pragma once

#include "dgpinn/adaptive_weights.hpp"
#include "dgpinn/losses.hpp"
#include "dgpinn/metrics.hpp"
#include "dgpinn/optimizers.hpp"
#include "dgpinn/run_config.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dgpinn {

/// One row of the loss trace (one term at one iteration).
struct TraceRow {
  long iter = 0;
  std::string phase;  // "adam" | "lbfgs"
  std::string term_id;
  double value = 0.0;
  double weighted_total = 0.0;
  double wallclock_s = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::string problem;
  bool converged = true;
  std::string stop_reason;
  /// Empty unless a phase aborted.
  std::string failure;

  LossWeights weights;          // weights in force at the end
  LossBreakdown final_loss;     // composite at the returned state
  double initial_data_loss = 0.0;
  double pretrain_data_loss = 0.0;  // after the Adam phase
  TestMetrics metrics;
  std::vector<TraceReport> trace_reports;

  long adam_iterations = 0;
  long lbfgs_iterations = 0;
  long lbfgs_evaluations = 0;
  long lbfgs_fallbacks = 0;
  /// Wall-clock seconds per phase: adam, weights, lbfgs, total.
  std::map<std::string, double> phase_seconds;

  std::vector<TraceRow> loss_trace;
};

struct TrainResult {
  RunReport report;
  TrainableState state;
};

/// Training sets for a configuration: closed-form observations on the grid,
/// or the column file for Navier-Stokes ingestion, corrupted when snr_db is
/// finite.
DatasetBundle prepare_dataset(const TrainConfig& config, const ProblemSpec& problem);

/// Problem description matching the configuration.
ProblemSpec problem_for(const TrainConfig& config);

/// Runs the configured method. Phase aborts produce a partial report with
/// converged = false rather than an exception; configuration errors throw.
TrainResult train(const TrainConfig& config);
TrainResult train_dg_pinn(const TrainConfig& config);
TrainResult train_pinn_baseline(const TrainConfig& config);

/// Adam on the data loss alone for config.m1 iterations; touches only the
/// network parameters. Appends trace rows to `report`.
void pretrain(const TrainConfig& config, const ProblemSpec& problem, const DatasetBundle& bundle,
              TrainableState& state, RunReport& report);

/// Computes adaptive weights once, then L-BFGS on the composite loss over the
/// full state for config.m2 iterations.
void finetune(const TrainConfig& config, const ProblemSpec& problem, const DatasetBundle& bundle,
              TrainableState& state, RunReport& report);

/// Seeds used for the network and for gamma.
std::uint64_t network_seed(const TrainConfig& config);
std::uint64_t unknowns_seed(const TrainConfig& config);

}  // namespace dgpinn
