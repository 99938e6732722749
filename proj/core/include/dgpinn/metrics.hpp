#pragma once

#include "dgpinn/mlp.hpp"
#include "dgpinn/problems.hpp"
#include "dgpinn/sampling.hpp"

#include <string>
#include <vector>

namespace dgpinn {

/// |truth - prediction|_2 / |truth|_2. Throws ContractError for a zero-norm
/// truth or mismatched lengths.
double relative_l2(const Vector& truth, const Vector& prediction);

/// 100 |estimate - truth| / |truth|, in percent. Throws ContractError for a
/// zero truth.
double ape(double estimate, double truth);

/// Subtracts the mean.
Vector mean_center(const Vector& values);

/// Subtracts the mean of each group of equal keys (e.g. one time snapshot).
Vector mean_center_by(const Vector& values, const Vector& keys);

struct TestMetrics {
  std::vector<std::string> channels;
  /// Against the clean field, per output channel. Pressure is compared after
  /// centering each time snapshot.
  std::vector<double> rt;
  /// Against the (possibly noisy) observations, per observed channel.
  std::vector<double> rt_observed;
  std::vector<std::string> unknowns;
  std::vector<double> estimates;
  std::vector<double> ape;
};

/// Test-set errors and coefficient errors for a trained state.
TestMetrics evaluate_metrics(const TrainableState& state, const ProblemSpec& problem,
                             const DatasetBundle& bundle);

}  // namespace dgpinn
