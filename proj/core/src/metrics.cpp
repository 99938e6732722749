#include "dgpinn/metrics.hpp"

#include "dgpinn/errors.hpp"

#include <cmath>
#include <map>

namespace dgpinn {

double relative_l2(const Vector& truth, const Vector& prediction) {
  if (truth.size() == 0 || truth.size() != prediction.size()) {
    throw ContractError("relative L2 needs equal, non-empty vectors");
  }
  const double denom = truth.norm();
  if (denom == 0.0) throw ContractError("relative L2 is undefined for a zero truth vector");
  return (truth - prediction).norm() / denom;
}

double ape(double estimate, double truth) {
  if (truth == 0.0) throw ContractError("APE is undefined for a zero reference value");
  return 100.0 * std::abs(estimate - truth) / std::abs(truth);
}

Vector mean_center(const Vector& values) {
  if (values.size() == 0) return values;
  return values.array() - values.mean();
}

Vector mean_center_by(const Vector& values, const Vector& keys) {
  if (values.size() != keys.size()) throw ContractError("values and keys differ in length");
  std::map<double, std::pair<double, Index>> groups;
  for (Index i = 0; i < values.size(); ++i) {
    auto& [sum, n] = groups[keys(i)];
    sum += values(i);
    ++n;
  }
  Vector out(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    const auto& [sum, n] = groups.at(keys(i));
    out(i) = values(i) - sum / static_cast<double>(n);
  }
  return out;
}

TestMetrics evaluate_metrics(const TrainableState& state, const ProblemSpec& problem,
                             const DatasetBundle& bundle) {
  TestMetrics m;
  const Matrix pred = forward_batch(state.network, bundle.test.points);
  const Vector time = bundle.test.points.row(problem.time_input).transpose();
  const bool has_pressure = problem.id == ProblemId::navier_stokes;
  for (int c = 0; c < problem.output_dim(); ++c) {
    m.channels.push_back(problem.output_names[static_cast<std::size_t>(c)]);
    Vector truth = bundle.test_truth.row(c).transpose();
    Vector guess = pred.row(c).transpose();
    if (has_pressure && c == 2) {
      truth = mean_center_by(truth, time);
      guess = mean_center_by(guess, time);
    }
    m.rt.push_back(relative_l2(truth, guess));
  }
  for (int c = 0; c < problem.observed_outputs; ++c) {
    m.rt_observed.push_back(
        relative_l2(bundle.test.targets.row(c).transpose(), pred.row(c).transpose()));
  }
  const Vector& reference = reference_coefficients(problem);
  for (Index j = 0; j < state.unknowns.size(); ++j) {
    m.unknowns.push_back(state.unknowns.names[static_cast<std::size_t>(j)]);
    m.estimates.push_back(state.unknowns.values(j));
    m.ape.push_back(ape(state.unknowns.values(j), reference(j)));
  }
  return m;
}

}  // namespace dgpinn
