#pragma once

#include "dgpinn/losses.hpp"

#include <string>
#include <vector>

namespace dgpinn {

/// Traces below this are treated as degenerate: lambda = 1 and flagged.
inline constexpr double kTraceFloor = 1e-12;

struct TraceEntry {
  std::string term_id;
  double trace = 0.0;  // tr(J J^T)
  Index count = 0;     // N_j
  double weight = 1.0;
  bool clamped = false;
};

struct TraceReport {
  std::vector<TraceEntry> entries;
  double R = 0.0;
  /// Adam iteration at which the weights were set (0-based, before the update).
  long iteration = 0;
  std::string phase;

  LossWeights weights() const;
};

/// Sum over samples of |d row_k / d Theta|^2 for a 1 x N row recorded on
/// `tape`. One reverse sweep covers every sample.
double trace_jjt(Tape& tape, const Var& row);

/// lambda_j = N_j R / tr_j with R = sum_j tr_j / N_j over unclamped terms.
TraceReport compute_weights(const std::vector<std::string>& term_ids,
                            const std::vector<double>& traces,
                            const std::vector<Index>& counts);

/// Traces of every term of the problem with respect to the full Theta
/// (network and gamma), followed by compute_weights.
TraceReport adaptive_weights(const TrainableState& state, const ProblemSpec& problem,
                             const DatasetBundle& bundle);

}  // namespace dgpinn
