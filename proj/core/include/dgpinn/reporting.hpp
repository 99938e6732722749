#pragma once

#include "dgpinn/trainer.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dgpinn {

/// RunReport as pretty-printed JSON. Timing lives under "timing" and in
/// "wallclock_s" fields so that reports can be compared without it.
std::string report_json(const RunReport& report);

/// The report with the "timing" object removed, re-serialized. Two runs of
/// the same configuration produce identical strings.
std::string strip_timing(std::string_view report_json);

/// Columns iter,phase,term_id,value,weighted_total,wallclock_s.
void write_loss_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

/// File names inside a run directory.
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kTraceFile = "loss_trace.csv";
inline constexpr const char* kConfigFile = "config.ini";
inline constexpr const char* kCheckpointFile = "checkpoint.dgpn";

/// Writes report, loss trace, config echo and checkpoint into `dir`.
void write_run_directory(const std::filesystem::path& dir, const TrainResult& result);

/// Metrics recomputed from a persisted run directory (config echo plus
/// checkpoint). Throws ConfigError when the checkpoint does not match.
TestMetrics evaluate_run_directory(const std::filesystem::path& dir);
TestMetrics evaluate_checkpoint(const std::filesystem::path& checkpoint, const TrainConfig& config);

/// Runs `count` jobs on up to `jobs` threads; job i writes only slot i.
/// Exceptions are captured per job and rethrown from the caller after all
/// jobs finish (first failing index wins).
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

enum class SweepAxis { m1, n_d, snr_db };
std::string to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view text);

struct SweepPoint {
  double value = 0.0;
  bool converged = true;
  double wallclock_s = 0.0;
  std::vector<double> rt;           // per output channel, clean truth
  std::vector<double> rt_observed;  // per observed channel, noisy truth
  std::vector<double> estimates;
  std::vector<double> ape;

  bool operator==(const SweepPoint&) const = default;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::m1;
  std::vector<std::string> channels;
  std::vector<std::string> observed_channels;
  std::vector<std::string> unknowns;
  std::vector<SweepPoint> points;

  bool operator==(const SweepResult&) const = default;
};

/// Config for one axis value.
TrainConfig sweep_config(const TrainConfig& base, SweepAxis axis, double value);

/// Called with (index, value, result) after each run completes.
using RunSink = std::function<void(std::size_t, const TrainResult&)>;

/// Trains DG-PINN once per value with everything else fixed. Values must be
/// strictly increasing. Failed runs are recorded with converged = false.
SweepResult run_sweep(SweepAxis axis, const std::vector<double>& values, const TrainConfig& base,
                      int jobs, const RunSink& sink = {});

std::string sweep_csv(const SweepResult& result);
/// Inverse of sweep_csv.
SweepResult parse_sweep_csv(std::string_view text);

/// Indices whose final loss exceeds factor x the cohort median (non-finite
/// losses always count).
std::vector<bool> outlier_mask(const std::vector<double>& final_losses, double factor = 1e3);

struct TrialSummary {
  std::uint64_t seed = 0;
  bool converged = true;
  bool outlier = false;
  double final_loss = 0.0;
  double wallclock_s = 0.0;
  std::vector<double> rt;
  std::vector<double> ape;
};

struct MethodSummary {
  TrainMode mode = TrainMode::dg_pinn;
  std::vector<TrialSummary> trials;
  std::size_t excluded = 0;
  /// Means over non-excluded trials.
  std::vector<double> rt;
  std::vector<double> ape;
  double wallclock_s = 0.0;
};

struct Comparison {
  std::string problem;
  std::vector<std::string> channels;
  std::vector<std::string> unknowns;
  std::vector<MethodSummary> methods;
};

/// Trains both methods on seeds 0..trials-1 (init, sampling and noise seeds
/// all set to the trial index).
Comparison run_comparison(const TrainConfig& base, int trials, int jobs,
                          const std::function<void(TrainMode, std::size_t, const TrainResult&)>&
                              sink = {});

/// Summary with one row per method: R_t columns, APE columns, wall-clock.
std::string comparison_json(const Comparison& comparison);

/// Summary from already completed trials (used by run_comparison).
MethodSummary summarize(TrainMode mode, const std::vector<TrainResult>& runs);

}  // namespace dgpinn
