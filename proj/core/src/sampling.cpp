#include "dgpinn/sampling.hpp"

#include "dgpinn/errors.hpp"
#include "dgpinn/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

namespace dgpinn {

namespace {

enum SeedStream : std::uint64_t { kResidual = 11, kInitial = 12, kBoundary = 13, kData = 14 };

constexpr double kEdgeTolerance = 1e-12;

PointSet gather(const Observations& obs, const std::vector<Index>& nodes) {
  PointSet set;
  set.points.resize(obs.points.rows(), static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    set.points.col(static_cast<Index>(k)) = obs.points.col(nodes[k]);
  }
  set.nodes = nodes;
  return set;
}

std::vector<Index> pick(const std::vector<Index>& candidates, Index count, std::uint64_t seed,
                        const char* what) {
  if (count > static_cast<Index>(candidates.size())) {
    throw ConfigError(std::string("requested ") + std::to_string(count) + " " + what +
                      " points but only " + std::to_string(candidates.size()) +
                      " candidates exist");
  }
  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(count));
  for (Index i : sample_without_replacement(static_cast<Index>(candidates.size()), count, seed)) {
    chosen.push_back(candidates[static_cast<std::size_t>(i)]);
  }
  return chosen;
}

Matrix condition_targets(const std::vector<ConditionOperator>& ops, const Matrix& points) {
  Matrix t(static_cast<Index>(ops.size()), points.cols());
  for (std::size_t r = 0; r < ops.size(); ++r) {
    for (Index k = 0; k < points.cols(); ++k) {
      t(static_cast<Index>(r), k) = ops[r].target(points.col(k));
    }
  }
  return t;
}

}  // namespace

Index GridSpec::node_count() const {
  Index n = 1;
  for (int c : counts) n *= c;
  return n;
}

int GridSpec::coordinate_index(Index node, int d) const {
  for (int e = dims() - 1; e > d; --e) node /= counts[e];
  return static_cast<int>(node % counts[d]);
}

Vector GridSpec::node(Index node) const {
  Vector p(dims());
  for (int d = dims() - 1; d >= 0; --d) {
    const int i = static_cast<int>(node % counts[d]);
    node /= counts[d];
    // Endpoints are exact so manifold membership tests need no tolerance games.
    p(d) = i == counts[d] - 1 ? upper[d] : lower[d] + i * spacing(d);
  }
  return p;
}

void GridSpec::validate() const {
  if (counts.empty() || lower.size() != counts.size() || upper.size() != counts.size()) {
    throw ConfigError("grid ranges and counts must have one entry per dimension");
  }
  for (int d = 0; d < dims(); ++d) {
    if (counts[d] < 2) throw ConfigError("grid needs at least 2 points per dimension");
    if (!(upper[d] > lower[d])) throw ConfigError("grid range must be increasing");
  }
}

GridSpec default_grid(const ProblemSpec& problem) {
  GridSpec g;
  for (const auto& [lo, hi] : problem.domain) {
    g.lower.push_back(lo);
    g.upper.push_back(hi);
  }
  g.counts = problem.id == ProblemId::navier_stokes ? std::vector<int>{41, 41, 21}
                                                     : std::vector<int>{201, 201};
  return g;
}

Observations observe_on_grid(const ProblemSpec& problem, const GridSpec& grid) {
  grid.validate();
  if (grid.dims() != problem.input_dim()) throw ConfigError("grid dimension mismatch");
  Observations obs;
  const Index n = grid.node_count();
  obs.points.resize(grid.dims(), n);
  obs.clean.resize(problem.output_dim(), n);
  for (Index k = 0; k < n; ++k) {
    obs.points.col(k) = grid.node(k);
    obs.clean.col(k) = analytic_solution(problem, obs.points.col(k));
  }
  obs.observed = obs.clean.topRows(problem.observed_outputs);
  return obs;
}

Observations load_flow_columns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file " + path.string());
  std::vector<std::array<double, 6>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::array<double, 6> row{};
    for (double& v : row) {
      if (!(fields >> v)) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": expected 6 columns `x y t u v p`");
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": too many columns");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("data file " + path.string() + " has no samples");
  Observations obs;
  const auto n = static_cast<Index>(rows.size());
  obs.points.resize(3, n);
  obs.clean.resize(3, n);
  for (Index k = 0; k < n; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    obs.points.col(k) << r[0], r[1], r[2];
    obs.clean.col(k) << r[3], r[4], r[5];
  }
  obs.observed = obs.clean.topRows(2);
  return obs;
}

Vector add_noise(const Vector& values, double snr_db, std::uint64_t seed) {
  if (values.size() == 0) throw ContractError("add_noise on an empty signal");
  if (std::isnan(snr_db)) throw ContractError("SNR must be a number");
  if (std::isinf(snr_db) && snr_db > 0) return values;
  const double power = values.squaredNorm() / static_cast<double>(values.size());
  if (power == 0.0) throw ContractError("SNR is undefined for an all-zero signal");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  Vector out = values;
  for (Index i = 0; i < out.size(); ++i) out(i) += sigma * rng.normal();
  return out;
}

void corrupt(Observations& obs, double snr_db, std::uint64_t seed) {
  for (Index c = 0; c < obs.observed.rows(); ++c) {
    const Vector clean = obs.clean.row(c).transpose();
    obs.observed.row(c) =
        add_noise(clean, snr_db, derive_seed(seed, static_cast<std::uint64_t>(c))).transpose();
  }
}

std::vector<Index> sample_without_replacement(Index n, Index k, std::uint64_t seed) {
  if (k < 0 || k > n) throw ConfigError("cannot draw " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  Rng rng(seed);
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

DatasetBundle build_bundle(const ProblemSpec& problem, const Observations& obs,
                           const SampleCounts& counts, std::uint64_t seed) {
  if (counts.residual < 1 || counts.data < 1) {
    throw ConfigError("residual and data counts must be positive");
  }
  if (obs.points.rows() != problem.input_dim()) throw ConfigError("observation dimension mismatch");
  const Index n = obs.points.cols();

  // Candidate manifolds.
  std::vector<double> lo(problem.input_dim()), hi(problem.input_dim());
  for (int d = 0; d < problem.input_dim(); ++d) {
    lo[d] = obs.points.row(d).minCoeff();
    hi[d] = obs.points.row(d).maxCoeff();
  }
  auto on_spatial_edge = [&](Index k) {
    for (int d : problem.spatial_inputs()) {
      const double v = obs.points(d, k);
      if (std::abs(v - lo[d]) <= kEdgeTolerance || std::abs(v - hi[d]) <= kEdgeTolerance) {
        return true;
      }
    }
    return false;
  };
  const bool interior_residuals = problem.id == ProblemId::navier_stokes;
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<Index> residual_candidates, initial_candidates, boundary_candidates;
  for (Index k = 0; k < n; ++k) {
    const bool edge = on_spatial_edge(k);
    if (!interior_residuals || !edge) residual_candidates.push_back(k);
    if (std::abs(obs.points(problem.time_input, k) - lo[problem.time_input]) <= kEdgeTolerance) {
      initial_candidates.push_back(k);
    }
    if (edge) boundary_candidates.push_back(k);
  }

  DatasetBundle b;
  b.residual = gather(obs, pick(residual_candidates, counts.residual,
                                derive_seed(seed, kResidual), "residual"));
  b.residual.targets.resize(static_cast<Index>(problem.sources.size()), b.residual.size());
  for (std::size_t r = 0; r < problem.sources.size(); ++r) {
    for (Index k = 0; k < b.residual.size(); ++k) {
      b.residual.targets(static_cast<Index>(r), k) = problem.sources[r](b.residual.points.col(k));
    }
  }

  if (!problem.initial_conditions.empty()) {
    b.initial = gather(obs, pick(initial_candidates, counts.initial,
                                 derive_seed(seed, kInitial), "initial"));
    b.initial.targets = condition_targets(problem.initial_conditions, b.initial.points);
  }
  if (!problem.boundary_conditions.empty()) {
    b.boundary = gather(obs, pick(boundary_candidates, counts.boundary,
                                  derive_seed(seed, kBoundary), "boundary"));
    b.boundary.targets = condition_targets(problem.boundary_conditions, b.boundary.points);
  }

  std::vector<Index> data_nodes = pick(all, counts.data, derive_seed(seed, kData), "data");
  b.data = gather(obs, data_nodes);
  b.data.targets.resize(obs.observed.rows(), b.data.size());
  for (Index k = 0; k < b.data.size(); ++k) {
    b.data.targets.col(k) = obs.observed.col(data_nodes[static_cast<std::size_t>(k)]);
  }

  std::vector<char> in_data(static_cast<std::size_t>(n), 0);
  for (Index k : data_nodes) in_data[static_cast<std::size_t>(k)] = 1;
  std::vector<Index> test_nodes;
  test_nodes.reserve(static_cast<std::size_t>(n - counts.data));
  for (Index k = 0; k < n; ++k) {
    if (!in_data[static_cast<std::size_t>(k)]) test_nodes.push_back(k);
  }
  b.test = gather(obs, test_nodes);
  b.test.targets.resize(obs.observed.rows(), b.test.size());
  b.test_truth.resize(obs.clean.rows(), b.test.size());
  for (Index k = 0; k < b.test.size(); ++k) {
    const Index node = test_nodes[static_cast<std::size_t>(k)];
    b.test.targets.col(k) = obs.observed.col(node);
    b.test_truth.col(k) = obs.clean.col(node);
  }
  return b;
}

DatasetBundle build_bundle(const ProblemSpec& problem, const GridSpec& grid,
                           const SampleCounts& counts, std::uint64_t seed, double snr_db,
                           std::uint64_t noise_seed) {
  Observations obs = observe_on_grid(problem, grid);
  corrupt(obs, snr_db, noise_seed);
  return build_bundle(problem, obs, counts, seed);
}

}  // namespace dgpinn
