#pragma once

#include "dgpinn/problems.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

namespace dgpinn {

/// Regular grid; node index runs with the last dimension fastest.
struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> counts;

  int dims() const { return static_cast<int>(counts.size()); }
  Index node_count() const;
  double spacing(int d) const { return (upper[d] - lower[d]) / (counts[d] - 1); }
  /// Index of node along dimension d.
  int coordinate_index(Index node, int d) const;
  Vector node(Index node) const;
  /// Throws ConfigError unless every count is >= 2 and ranges are ordered.
  void validate() const;
};

/// 201x201 over the unit square for the 1-D problems, 41x41x21 for
/// Taylor-Green.
GridSpec default_grid(const ProblemSpec& problem);

struct SampleCounts {
  Index residual = 2000;
  Index initial = 100;
  Index boundary = 200;
  Index data = 10000;

  bool operator==(const SampleCounts&) const = default;
};

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Field observations at candidate nodes (grid nodes or ingested rows).
struct Observations {
  Matrix points;    // inputs x G
  Matrix clean;     // output channels x G; all problem outputs
  Matrix observed;  // observed channels x G, possibly noisy
  /// Whether `clean` holds ground truth (false only for ingested data without
  /// a reference, in which case it equals the file contents).
  bool has_truth = true;
};

/// Closed-form field on every grid node.
Observations observe_on_grid(const ProblemSpec& problem, const GridSpec& grid);

/// Reads whitespace-separated `x y t u v p` rows; lines starting with '#'
/// and blank lines are skipped.
Observations load_flow_columns(const std::filesystem::path& path);

/// Additive white Gaussian noise with variance mean(values^2) / 10^(snr/10).
/// snr_db = +inf returns the input unchanged. Throws ContractError for an
/// all-zero signal or empty input.
Vector add_noise(const Vector& values, double snr_db, std::uint64_t seed);

/// Corrupts every observed channel independently (seed derived per channel).
void corrupt(Observations& obs, double snr_db, std::uint64_t seed);

struct PointSet {
  Matrix points;               // inputs x N
  Matrix targets;              // rows x N; meaning depends on the set
  std::vector<Index> nodes;    // candidate indices the points came from

  Index size() const { return points.cols(); }
};

/// Training and test sets for one problem.
///
/// residual.targets rows follow problem.residual_terms (source values),
/// initial/boundary.targets rows follow the condition operators, data.targets
/// holds the observed channels. The test set is every candidate node not in
/// the data set.
struct DatasetBundle {
  PointSet residual;
  PointSet initial;
  PointSet boundary;
  PointSet data;
  PointSet test;        // targets = observed channels (possibly noisy)
  Matrix test_truth;    // all output channels, clean
};

/// Uniform sampling without replacement over the candidate nodes of each
/// manifold. Throws ConfigError when a count exceeds its population.
DatasetBundle build_bundle(const ProblemSpec& problem, const Observations& obs,
                           const SampleCounts& counts, std::uint64_t seed);

/// Observes the closed form on `grid`, corrupts it when snr_db is finite, then
/// samples.
DatasetBundle build_bundle(const ProblemSpec& problem, const GridSpec& grid,
                           const SampleCounts& counts, std::uint64_t seed,
                           double snr_db = kNoNoise, std::uint64_t noise_seed = 0);

/// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<Index> sample_without_replacement(Index n, Index k, std::uint64_t seed);

}  // namespace dgpinn
