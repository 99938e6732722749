#include "dgpinn/trainer.hpp"

#include "dgpinn/errors.hpp"
#include "dgpinn/random.hpp"

#include <chrono>
#include <cmath>

namespace dgpinn {

namespace {

using Clock = std::chrono::steady_clock;

enum SeedStream : std::uint64_t { kNetworkStream = 1, kUnknownStream = 2 };

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Wall-clock origin of the current run; rows are stamped relative to it.
struct RunClock {
  Clock::time_point start = Clock::now();
  double now() const { return seconds_since(start); }
};

void record(RunReport& report, long iter, const char* phase, const LossBreakdown& b,
            const RunClock& clock) {
  const double t = clock.now();
  for (const auto& [id, value] : b.terms) {
    report.loss_trace.push_back({iter, phase, id, value, b.total, t});
  }
}

bool sampled(const TrainConfig& config, long iter, long last) {
  return iter % config.trace_every == 0 || iter == last;
}

std::span<const double> view(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void finish(const ProblemSpec& problem, const DatasetBundle& bundle, const TrainableState& state,
            RunReport& report, const RunClock& clock) {
  if (!report.weights.empty()) {
    report.final_loss = composite(state, problem, bundle, report.weights, false).breakdown;
  }
  report.metrics = evaluate_metrics(state, problem, bundle);
  report.phase_seconds["total"] = clock.now();
}

// L-BFGS on the composite with frozen weights; updates state to the best point.
void run_lbfgs(const TrainConfig& config, const ProblemSpec& problem, const DatasetBundle& bundle,
               TrainableState& state, RunReport& report, const RunClock& clock) {
  const auto phase_start = Clock::now();
  const long offset = report.adam_iterations;
  LossBreakdown last;
  TrainableState scratch = state;
  Objective objective = [&](const Vector& x, Vector& grad) {
    scratch.assign(view(x));
    LossEvaluation e = composite(scratch, problem, bundle, report.weights, true);
    grad = std::move(e.gradient);
    last = e.breakdown;
    return e.breakdown.total;
  };
  LbfgsConfig lc;
  lc.step_scale = config.lbfgs_step_scale;
  lc.history = config.lbfgs_history;
  const LbfgsCallback callback = [&](const LbfgsIteration& it, const Vector&) {
    if (sampled(config, it.iteration, config.m2)) {
      record(report, offset + it.iteration, "lbfgs", last, clock);
    }
  };
  const LbfgsResult r = lbfgs_minimize(objective, state.flatten(), lc, config.m2, callback);
  state.assign(view(r.x));
  report.lbfgs_iterations = r.iterations;
  report.lbfgs_evaluations = r.evaluations;
  for (const auto& row : r.trace) report.lbfgs_fallbacks += row.fallback ? 1 : 0;
  report.converged = r.converged;
  report.stop_reason = r.stop_reason;
  report.phase_seconds["lbfgs"] = seconds_since(phase_start);
}

TraceReport weights_at(const TrainableState& state, const ProblemSpec& problem,
                       const DatasetBundle& bundle, long iteration, const char* phase,
                       RunReport& report) {
  const auto start = Clock::now();
  TraceReport t = adaptive_weights(state, problem, bundle);
  t.iteration = iteration;
  t.phase = phase;
  report.phase_seconds["weights"] += seconds_since(start);
  report.weights = t.weights();
  report.trace_reports.push_back(t);
  return t;
}

RunReport fresh_report(const TrainConfig& config, const ProblemSpec& problem) {
  RunReport r;
  r.config = config;
  r.problem = problem.name();
  r.phase_seconds = {{"adam", 0.0}, {"weights", 0.0}, {"lbfgs", 0.0}, {"total", 0.0}};
  return r;
}

void abort_report(RunReport& report, const std::exception& e) {
  report.converged = false;
  report.failure = e.what();
  report.stop_reason = "aborted";
}

}  // namespace

std::uint64_t network_seed(const TrainConfig& config) {
  return derive_seed(config.init_seed, kNetworkStream);
}

std::uint64_t unknowns_seed(const TrainConfig& config) {
  return derive_seed(config.init_seed, kUnknownStream);
}

ProblemSpec problem_for(const TrainConfig& config) {
  return make_problem(config.problem, !config.data_file.empty());
}

DatasetBundle prepare_dataset(const TrainConfig& config, const ProblemSpec& problem) {
  Observations obs;
  if (!config.data_file.empty()) {
    obs = load_flow_columns(config.data_file);
  } else {
    GridSpec grid = default_grid(problem);
    if (!config.grid.empty()) grid.counts = config.grid;
    obs = observe_on_grid(problem, grid);
  }
  corrupt(obs, config.snr_db, config.noise_seed);
  return build_bundle(problem, obs, config.counts, config.sampling_seed);
}

namespace {

void pretrain_phase(const TrainConfig& config, const ProblemSpec& problem,
                    const DatasetBundle& bundle, TrainableState& state, RunReport& report,
                    const RunClock& clock) {
  if (config.mode != TrainMode::dg_pinn) throw UsageError("pretraining belongs to DG-PINN runs");
  const auto start = Clock::now();
  Adam adam(state.network.parameter_count(), {config.adam_lr});
  Vector theta = state.network.flatten();
  for (long k = 0; k < config.m1; ++k) {
    const LossEvaluation e = data_objective(state.network, problem, bundle.data, true);
    if (!std::isfinite(e.breakdown.total)) {
      throw NumericalError("pre-training diverged at Adam iteration " + std::to_string(k));
    }
    if (k == 0) report.initial_data_loss = e.breakdown.total;
    if (sampled(config, k, config.m1 - 1)) record(report, k, "adam", e.breakdown, clock);
    adam.step(theta, e.gradient);
    state.network.assign(view(theta));
    report.adam_iterations = k + 1;
  }
  report.pretrain_data_loss = data_objective(state.network, problem, bundle.data, false).breakdown.total;
  report.phase_seconds["adam"] += seconds_since(start);
}

void finetune_phase(const TrainConfig& config, const ProblemSpec& problem,
                    const DatasetBundle& bundle, TrainableState& state, RunReport& report,
                    const RunClock& clock) {
  weights_at(state, problem, bundle, report.adam_iterations, "finetune", report);
  run_lbfgs(config, problem, bundle, state, report, clock);
}

}  // namespace

void pretrain(const TrainConfig& config, const ProblemSpec& problem, const DatasetBundle& bundle,
              TrainableState& state, RunReport& report) {
  pretrain_phase(config, problem, bundle, state, report, RunClock{});
}

void finetune(const TrainConfig& config, const ProblemSpec& problem, const DatasetBundle& bundle,
              TrainableState& state, RunReport& report) {
  finetune_phase(config, problem, bundle, state, report, RunClock{});
}

TrainResult train_dg_pinn(const TrainConfig& config) {
  config.validate();
  if (config.mode != TrainMode::dg_pinn) throw ConfigError("train_dg_pinn needs mode dg_pinn");
  const ProblemSpec problem = problem_for(config);
  const DatasetBundle bundle = prepare_dataset(config, problem);
  const RunClock clock;
  TrainResult out{fresh_report(config, problem), {}};
  out.state.network = init_network(config.layer_widths(), network_seed(config));
  // gamma is drawn when fine-tuning starts; until then it is a placeholder.
  out.state.unknowns.names = problem.unknown_names;
  out.state.unknowns.values = Vector::Zero(static_cast<Index>(problem.unknown_names.size()));
  try {
    pretrain_phase(config, problem, bundle, out.state, out.report, clock);
    out.state.unknowns = init_inverse(problem, unknowns_seed(config));
    finetune_phase(config, problem, bundle, out.state, out.report, clock);
  } catch (const NumericalError& e) {
    abort_report(out.report, e);
  } catch (const EvaluationError& e) {
    abort_report(out.report, e);
  }
  finish(problem, bundle, out.state, out.report, clock);
  return out;
}

TrainResult train_pinn_baseline(const TrainConfig& config) {
  config.validate();
  if (config.mode != TrainMode::pinn_baseline) {
    throw ConfigError("train_pinn_baseline needs mode pinn_baseline");
  }
  const ProblemSpec problem = problem_for(config);
  const DatasetBundle bundle = prepare_dataset(config, problem);
  const RunClock clock;
  TrainResult out{fresh_report(config, problem), {}};
  out.state.network = init_network(config.layer_widths(), network_seed(config));
  out.state.unknowns = init_inverse(problem, unknowns_seed(config));
  RunReport& report = out.report;
  try {
    Adam adam(out.state.size(), {config.adam_lr});
    Vector theta = out.state.flatten();
    for (long k = 0; k < config.m1; ++k) {
      if (k % config.weight_cadence == 0) {
        weights_at(out.state, problem, bundle, k, "adam", report);
      }
      const auto start = Clock::now();
      const LossEvaluation e = composite(out.state, problem, bundle, report.weights, true);
      if (!std::isfinite(e.breakdown.total)) {
        throw NumericalError("training diverged at Adam iteration " + std::to_string(k));
      }
      if (k == 0) {
        report.initial_data_loss =
            data_objective(out.state.network, problem, bundle.data, false).breakdown.total;
      }
      if (sampled(config, k, config.m1 - 1)) record(report, k, "adam", e.breakdown, clock);
      adam.step(theta, e.gradient);
      out.state.assign(view(theta));
      report.adam_iterations = k + 1;
      report.phase_seconds["adam"] += seconds_since(start);
    }
    report.pretrain_data_loss =
        data_objective(out.state.network, problem, bundle.data, false).breakdown.total;
    run_lbfgs(config, problem, bundle, out.state, report, clock);
  } catch (const NumericalError& e) {
    abort_report(report, e);
  } catch (const EvaluationError& e) {
    abort_report(report, e);
  }
  finish(problem, bundle, out.state, report, clock);
  return out;
}

TrainResult train(const TrainConfig& config) {
  return config.mode == TrainMode::dg_pinn ? train_dg_pinn(config) : train_pinn_baseline(config);
}

}  // namespace dgpinn
