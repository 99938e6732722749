#pragma once

#include "dgpinn/mlp.hpp"
#include "dgpinn/network_eval.hpp"
#include "dgpinn/problems.hpp"
#include "dgpinn/sampling.hpp"

#include <map>
#include <string>
#include <vector>

namespace dgpinn {

/// Term id -> lambda.
using LossWeights = std::map<std::string, double>;

/// Every term of the problem weighted 1.
LossWeights unit_weights(const ProblemSpec& problem);

/// Throws ContractError unless `weights` covers exactly the problem's term ids
/// with finite non-negative values.
void validate_weights(const ProblemSpec& problem, const LossWeights& weights);

struct LossBreakdown {
  std::map<std::string, double> terms;  // mean squares
  double total = 0.0;                   // sum of lambda_j * term_j
};

/// Tape leaves for a TrainableState. gamma is empty when unbound.
struct BoundState {
  NetworkVars net;
  std::vector<Var> gamma;
};

/// Binds the network at slots [0, P) and, if requested, gamma at [P, P + K).
BoundState bind_state(Tape& tape, const TrainableState& state, bool bind_unknowns = true);

/// Per-sample rows (1 x N) whose mean squares are the loss terms.
struct TermRows {
  std::vector<std::string> ids;
  std::vector<Var> rows;

  const Var& at(const std::string& id) const;
};

/// Output minus observation, one row per observed channel.
TermRows data_rows(Tape& tape, const NetworkVars& net, const ProblemSpec& problem,
                   const PointSet& data);
/// Residual minus source, one row per residual term.
TermRows residual_rows(Tape& tape, const BoundState& state, const ProblemSpec& problem,
                       const PointSet& residual);
/// Operator minus target for every condition on the manifold.
TermRows condition_rows(Tape& tape, const NetworkVars& net, const ProblemSpec& problem,
                        const PointSet& set, Manifold manifold);
/// Every term of the problem in canonical order.
TermRows all_term_rows(Tape& tape, const BoundState& state, const ProblemSpec& problem,
                       const DatasetBundle& bundle);

/// Per observed channel (Navier-Stokes: d1, d2); their sum is the data loss.
std::vector<double> data_loss(const TrainableState& state, const ProblemSpec& problem,
                              const PointSet& data);
std::vector<double> residual_loss(const TrainableState& state, const ProblemSpec& problem,
                                  const PointSet& residual);
/// Initial- or boundary-condition term by id, evaluated on `set`.
double condition_loss(const TrainableState& state, const ProblemSpec& problem,
                      const PointSet& set, const std::string& term_id);

struct LossEvaluation {
  LossBreakdown breakdown;
  Vector gradient;  // over the flat state; empty when not requested
};

/// Weighted composite loss recorded on one tape, so one backward sweep gives
/// d total / d Theta.
LossEvaluation composite(const TrainableState& state, const ProblemSpec& problem,
                         const DatasetBundle& bundle, const LossWeights& weights,
                         bool with_gradient = true);

/// Unweighted data loss (sum over observed channels) with the gradient over
/// the network parameters only.
LossEvaluation data_objective(const NetworkParams& network, const ProblemSpec& problem,
                              const PointSet& data, bool with_gradient = true);

}  // namespace dgpinn
