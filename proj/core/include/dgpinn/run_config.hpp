#pragma once

#include "dgpinn/problems.hpp"
#include "dgpinn/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dgpinn {

enum class TrainMode { dg_pinn, pinn_baseline };

std::string to_string(TrainMode mode);
/// Accepts dg_pinn / dg-pinn and pinn_baseline / pinn / baseline.
TrainMode parse_mode(std::string_view text);

struct TrainConfig {
  ProblemId problem = ProblemId::heat;
  /// Column file with `x y t u v p` rows (Navier-Stokes only).
  std::string data_file;

  int hidden_layers = 3;
  int hidden_width = 100;

  std::uint64_t init_seed = 0;
  std::uint64_t sampling_seed = 0;
  std::uint64_t noise_seed = 0;

  SampleCounts counts;
  /// Grid nodes per dimension; empty selects the problem default.
  std::vector<int> grid;
  double snr_db = kNoNoise;

  TrainMode mode = TrainMode::dg_pinn;
  long m1 = 20000;
  long m2 = 10000;
  double adam_lr = 1e-3;
  double lbfgs_step_scale = 0.1;
  int lbfgs_history = 50;
  /// Baseline only: Adam iterations between adaptive-weight updates.
  long weight_cadence = 1000;
  /// Loss-trace sampling interval in iterations (the last iteration of each
  /// phase is always recorded).
  long trace_every = 1;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  std::vector<int> layer_widths() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Paper budgets and counts for the problem.
TrainConfig default_config(ProblemId problem);

/// M1 = 5,000, M2 = 2,000; beam additionally uses N_r = 1,000.
void apply_desk_preset(TrainConfig& config);

/// Sets one `section.key` entry. Throws ConfigError for an unknown key or an
/// unparsable value.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

/// All keys in file order, for documentation and --help output.
std::vector<std::string> config_keys();

/// Flat `key = value` text with `[section]` headers; '#' starts a comment.
/// Keys are applied on top of `base`.
TrainConfig parse_config_text(std::string_view text, TrainConfig base);
TrainConfig load_config_file(const std::filesystem::path& path, TrainConfig base);

/// (section.key, value) pairs in file order, values formatted as in the
/// config file.
std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config);

/// Inverse of parse_config_text; doubles are written with round-trip
/// precision so re-parsing reproduces the config exactly.
std::string to_config_text(const TrainConfig& config);

}  // namespace dgpinn
