#pragma once

#include "dgpinn/mlp.hpp"
#include "dgpinn/network_eval.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dgpinn {

enum class ProblemId { heat, wave, beam, navier_stokes };

std::string to_string(ProblemId id);
/// Accepts heat, wave, beam, navier_stokes_2d (aliases: navier_stokes, ns).
ProblemId parse_problem(std::string_view name);

enum class Manifold { interior, initial, boundary };

using PointFunction = std::function<double(const Vector& point)>;

/// One initial- or boundary-condition loss term: the operator applied to the
/// network output and the target it must match.
struct ConditionOperator {
  std::string term_id;
  Manifold manifold = Manifold::initial;
  Partial partial;
  PointFunction target;
};

/// Declarative description of one inverse problem.
struct ProblemSpec {
  ProblemId id = ProblemId::heat;
  std::vector<std::string> input_names;
  int time_input = 0;
  std::vector<std::string> output_names;
  /// Leading output channels that are observed and enter the data loss.
  int observed_outputs = 1;
  std::vector<std::pair<double, double>> domain;

  DerivSpec residual_spec;
  std::vector<std::string> residual_terms;
  std::vector<PointFunction> sources;
  std::vector<std::string> data_terms;
  std::vector<ConditionOperator> initial_conditions;
  std::vector<ConditionOperator> boundary_conditions;

  std::vector<std::string> unknown_names;
  Vector true_unknowns;
  /// Observations come from a column file rather than a closed form.
  bool external_data = false;

  std::string name() const { return to_string(id); }
  int input_dim() const { return static_cast<int>(input_names.size()); }
  int output_dim() const { return static_cast<int>(output_names.size()); }
  /// Loss term ids in canonical order: residual, initial, boundary, data.
  std::vector<std::string> term_ids() const;
  /// Partials needed to evaluate the condition operators on one manifold.
  DerivSpec condition_spec(Manifold manifold) const;
  /// Spatial inputs (all but time).
  std::vector<int> spatial_inputs() const;
};

/// Builds a problem with the reference coefficients: beta = 1/20 (heat),
/// c = 2 (wave), alpha = 1 (beam), (beta1, beta2) = (1, 0.01) (Navier-Stokes).
/// With external_data the Navier-Stokes domain is the cylinder-wake box
/// [1,8]x[-2,2]x[0,7]; otherwise the Taylor-Green box [0,2pi]^2x[0,1].
ProblemSpec make_problem(ProblemId id, bool external_data = false);

InverseParams init_inverse(const ProblemSpec& problem, std::uint64_t seed);

/// PDE residuals F[u; gamma] in the order of problem.residual_terms.
/// gamma holds the unknowns in the order of problem.unknown_names.
template <class T>
std::vector<T> residual(const ProblemSpec& problem, const BasicBundle<T>& bundle,
                        std::span<const T> gamma);

extern template std::vector<double> residual(const ProblemSpec&, const BasicBundle<double>&,
                                             std::span<const double>);
extern template std::vector<Var> residual(const ProblemSpec&, const BasicBundle<Var>&,
                                          std::span<const Var>);

/// Taylor-Green vortex (u, v, p) with viscosity beta2; solves the
/// incompressible Navier-Stokes equations with beta1 = 1.
std::array<double, 3> taylor_green(const Vector& point, double viscosity);

/// Closed-form field values (all output channels) with the true coefficients.
/// Throws ContractError for externally supplied data.
Vector analytic_solution(const ProblemSpec& problem, const Vector& point);

/// (term id, target) for every initial (resp. boundary) operator. Throws
/// ContractError when the point is not on the manifold.
std::vector<std::pair<std::string, double>> ic_values(const ProblemSpec& problem,
                                                      const Vector& point);
std::vector<std::pair<std::string, double>> bc_values(const ProblemSpec& problem,
                                                      const Vector& point);

/// Observed APE target: the squared coefficient for the 1-D problems, the raw
/// coefficients for Navier-Stokes. Equal to problem.true_unknowns.
inline const Vector& reference_coefficients(const ProblemSpec& problem) {
  return problem.true_unknowns;
}

}  // namespace dgpinn
