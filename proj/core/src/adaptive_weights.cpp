#include "dgpinn/adaptive_weights.hpp"

#include "dgpinn/errors.hpp"

#include <cmath>

namespace dgpinn {

LossWeights TraceReport::weights() const {
  LossWeights w;
  for (const auto& e : entries) w[e.term_id] = e.weight;
  return w;
}

double trace_jjt(Tape& tape, const Var& row) {
  if (row.cols() == 0) throw ContractError("trace of an empty term");
  return tape.per_sample_gradient_sq_norm(row);
}

TraceReport compute_weights(const std::vector<std::string>& term_ids,
                            const std::vector<double>& traces,
                            const std::vector<Index>& counts) {
  if (term_ids.size() != traces.size() || traces.size() != counts.size()) {
    throw ContractError("trace, count and term lists differ in length");
  }
  TraceReport report;
  for (std::size_t j = 0; j < traces.size(); ++j) {
    if (counts[j] < 1) throw ContractError("term '" + term_ids[j] + "' has no samples");
    if (!std::isfinite(traces[j]) || traces[j] < 0.0) {
      throw NumericalError("trace for term '" + term_ids[j] + "' is not a finite non-negative value");
    }
    TraceEntry e;
    e.term_id = term_ids[j];
    e.trace = traces[j];
    e.count = counts[j];
    e.clamped = traces[j] < kTraceFloor;
    if (!e.clamped) report.R += traces[j] / static_cast<double>(counts[j]);
    report.entries.push_back(e);
  }
  for (auto& e : report.entries) {
    e.weight = e.clamped ? 1.0 : static_cast<double>(e.count) * report.R / e.trace;
  }
  return report;
}

TraceReport adaptive_weights(const TrainableState& state, const ProblemSpec& problem,
                             const DatasetBundle& bundle) {
  Tape tape;
  const TermRows rows = all_term_rows(tape, bind_state(tape, state), problem, bundle);
  std::vector<double> traces;
  std::vector<Index> counts;
  for (const Var& r : rows.rows) {
    traces.push_back(trace_jjt(tape, r));
    counts.push_back(r.cols());
  }
  return compute_weights(rows.ids, traces, counts);
}

}  // namespace dgpinn
