#include "dgpinn/losses.hpp"

#include "dgpinn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace dgpinn {

namespace {

void require_points(const PointSet& set, const char* what) {
  if (set.size() == 0) throw ContractError(std::string(what) + " set is empty");
}

Var target_row(Tape& tape, const PointSet& set, Index r) {
  return tape.constant(set.targets.row(r));
}

const std::vector<ConditionOperator>& conditions(const ProblemSpec& problem, Manifold m) {
  return m == Manifold::initial ? problem.initial_conditions : problem.boundary_conditions;
}

const PointSet& set_for(const DatasetBundle& bundle, Manifold m) {
  return m == Manifold::initial ? bundle.initial : bundle.boundary;
}

}  // namespace

LossWeights unit_weights(const ProblemSpec& problem) {
  LossWeights w;
  for (const auto& id : problem.term_ids()) w[id] = 1.0;
  return w;
}

void validate_weights(const ProblemSpec& problem, const LossWeights& weights) {
  const auto ids = problem.term_ids();
  for (const auto& id : ids) {
    const auto it = weights.find(id);
    if (it == weights.end()) throw ContractError("no loss weight for term '" + id + "'");
    if (!std::isfinite(it->second) || it->second < 0.0) {
      throw ContractError("loss weight for '" + id + "' must be finite and non-negative");
    }
  }
  if (weights.size() != ids.size()) {
    for (const auto& [id, w] : weights) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        throw ContractError("term '" + id + "' does not belong to " + problem.name());
      }
    }
  }
}

const Var& TermRows::at(const std::string& id) const {
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] == id) return rows[k];
  }
  throw ContractError("no loss term '" + id + "'");
}

BoundState bind_state(Tape& tape, const TrainableState& state, bool bind_unknowns) {
  BoundState b;
  b.net = bind_network(tape, state.network);
  if (bind_unknowns) {
    const Index base = state.network.parameter_count();
    for (Index j = 0; j < state.unknowns.size(); ++j) {
      b.gamma.push_back(tape.parameter(Matrix::Constant(1, 1, state.unknowns.values(j)), base + j,
                                       state.unknowns.names[static_cast<std::size_t>(j)]));
    }
  }
  return b;
}

TermRows data_rows(Tape& tape, const NetworkVars& net, const ProblemSpec& problem,
                   const PointSet& data) {
  require_points(data, "data");
  if (data.targets.rows() != problem.observed_outputs) {
    throw ContractError("data targets do not match the observed channels");
  }
  std::vector<Partial> entries;
  for (int c = 0; c < problem.observed_outputs; ++c) entries.push_back({c, 0, 0});
  const DerivSpec spec(problem.input_dim(), problem.output_dim(), entries);
  const DerivBundle out = eval_with_input_derivatives(tape, net, data.points, spec);
  TermRows t;
  for (int c = 0; c < problem.observed_outputs; ++c) {
    t.ids.push_back(problem.data_terms[static_cast<std::size_t>(c)]);
    t.rows.push_back(out.value(c) - target_row(tape, data, c));
  }
  return t;
}

TermRows residual_rows(Tape& tape, const BoundState& state, const ProblemSpec& problem,
                       const PointSet& residual_set) {
  require_points(residual_set, "residual");
  if (state.gamma.size() != problem.unknown_names.size()) {
    throw ContractError("residual loss needs the unknown coefficients bound");
  }
  const DerivBundle b =
      eval_with_input_derivatives(tape, state.net, residual_set.points, problem.residual_spec);
  const std::vector<Var> f = residual<Var>(problem, b, state.gamma);
  TermRows t;
  for (std::size_t r = 0; r < f.size(); ++r) {
    t.ids.push_back(problem.residual_terms[r]);
    t.rows.push_back(f[r] - target_row(tape, residual_set, static_cast<Index>(r)));
  }
  return t;
}

TermRows condition_rows(Tape& tape, const NetworkVars& net, const ProblemSpec& problem,
                        const PointSet& set, Manifold manifold) {
  const auto& ops = conditions(problem, manifold);
  TermRows t;
  if (ops.empty()) return t;
  require_points(set, manifold == Manifold::initial ? "initial" : "boundary");
  if (set.targets.rows() != static_cast<Index>(ops.size())) {
    throw ContractError("condition targets do not match the operators");
  }
  const DerivBundle b =
      eval_with_input_derivatives(tape, net, set.points, problem.condition_spec(manifold));
  for (std::size_t r = 0; r < ops.size(); ++r) {
    t.ids.push_back(ops[r].term_id);
    t.rows.push_back(b.at(ops[r].partial) - target_row(tape, set, static_cast<Index>(r)));
  }
  return t;
}

TermRows all_term_rows(Tape& tape, const BoundState& state, const ProblemSpec& problem,
                       const DatasetBundle& bundle) {
  TermRows all = residual_rows(tape, state, problem, bundle.residual);
  for (Manifold m : {Manifold::initial, Manifold::boundary}) {
    TermRows c = condition_rows(tape, state.net, problem, set_for(bundle, m), m);
    all.ids.insert(all.ids.end(), c.ids.begin(), c.ids.end());
    all.rows.insert(all.rows.end(), c.rows.begin(), c.rows.end());
  }
  TermRows d = data_rows(tape, state.net, problem, bundle.data);
  all.ids.insert(all.ids.end(), d.ids.begin(), d.ids.end());
  all.rows.insert(all.rows.end(), d.rows.begin(), d.rows.end());
  return all;
}

std::vector<double> data_loss(const TrainableState& state, const ProblemSpec& problem,
                              const PointSet& data) {
  Tape tape;
  const TermRows t = data_rows(tape, bind_network(tape, state.network), problem, data);
  std::vector<double> out;
  for (const Var& r : t.rows) out.push_back(tape.mean_square(r).scalar());
  return out;
}

std::vector<double> residual_loss(const TrainableState& state, const ProblemSpec& problem,
                                  const PointSet& residual_set) {
  Tape tape;
  const TermRows t = residual_rows(tape, bind_state(tape, state), problem, residual_set);
  std::vector<double> out;
  for (const Var& r : t.rows) out.push_back(tape.mean_square(r).scalar());
  return out;
}

double condition_loss(const TrainableState& state, const ProblemSpec& problem,
                      const PointSet& set, const std::string& term_id) {
  for (Manifold m : {Manifold::initial, Manifold::boundary}) {
    for (const auto& op : conditions(problem, m)) {
      if (op.term_id != term_id) continue;
      Tape tape;
      const TermRows t =
          condition_rows(tape, bind_network(tape, state.network), problem, set, m);
      return tape.mean_square(t.at(term_id)).scalar();
    }
  }
  throw ContractError("no condition term '" + term_id + "' in " + problem.name());
}

LossEvaluation composite(const TrainableState& state, const ProblemSpec& problem,
                         const DatasetBundle& bundle, const LossWeights& weights,
                         bool with_gradient) {
  validate_weights(problem, weights);
  Tape tape;
  const TermRows t = all_term_rows(tape, bind_state(tape, state), problem, bundle);
  LossEvaluation out;
  std::optional<Var> total;
  for (std::size_t k = 0; k < t.ids.size(); ++k) {
    Var term = tape.mean_square(t.rows[k]);
    out.breakdown.terms[t.ids[k]] = term.scalar();
    Var weighted = tape.scale(term, weights.at(t.ids[k]));
    total = total ? *total + weighted : weighted;
  }
  out.breakdown.total = total->scalar();
  if (with_gradient) {
    tape.backward(*total);
    out.gradient = tape.gradient(state.size());
  }
  return out;
}

LossEvaluation data_objective(const NetworkParams& network, const ProblemSpec& problem,
                              const PointSet& data, bool with_gradient) {
  Tape tape;
  const TermRows t = data_rows(tape, bind_network(tape, network), problem, data);
  LossEvaluation out;
  std::optional<Var> total;
  for (std::size_t k = 0; k < t.ids.size(); ++k) {
    Var term = tape.mean_square(t.rows[k]);
    out.breakdown.terms[t.ids[k]] = term.scalar();
    total = total ? *total + term : term;
  }
  out.breakdown.total = total->scalar();
  if (with_gradient) {
    tape.backward(*total);
    out.gradient = tape.gradient(network.parameter_count());
  }
  return out;
}

}  // namespace dgpinn
