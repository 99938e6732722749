#include "dgpinn/problems.hpp"

#include "dgpinn/errors.hpp"

#include <cmath>
#include <numbers>

namespace dgpinn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kManifoldTolerance = 1e-12;

constexpr double kHeatBeta = 1.0 / 20.0;
constexpr double kWaveSpeed = 2.0;
constexpr double kBeamAlpha = 1.0;
constexpr double kNsBeta1 = 1.0;
constexpr double kNsBeta2 = 0.01;

double zero(const Vector&) { return 0.0; }

// Inputs are (x, t) for the 1-D problems.
ProblemSpec one_dimensional(ProblemId id) {
  ProblemSpec p;
  p.id = id;
  p.input_names = {"x", "t"};
  p.time_input = 1;
  p.output_names = {"u"};
  p.observed_outputs = 1;
  p.domain = {{0.0, 1.0}, {0.0, 1.0}};
  p.residual_terms = {"r"};
  p.sources = {zero};
  p.data_terms = {"d"};
  return p;
}

ProblemSpec make_heat() {
  ProblemSpec p = one_dimensional(ProblemId::heat);
  p.residual_spec = DerivSpec(2, 1, {{0, 1, 1}, {0, 0, 2}});
  p.initial_conditions = {{"i", Manifold::initial, {0, 0, 0},
                           [](const Vector& pt) { return std::sin(10.0 * kPi * pt(0)); }}};
  p.boundary_conditions = {{"b", Manifold::boundary, {0, 0, 0}, zero}};
  p.unknown_names = {"beta_sq"};
  p.true_unknowns = Vector::Constant(1, kHeatBeta * kHeatBeta);
  return p;
}

ProblemSpec make_wave() {
  ProblemSpec p = one_dimensional(ProblemId::wave);
  p.residual_spec = DerivSpec(2, 1, {{0, 1, 2}, {0, 0, 2}});
  p.initial_conditions = {
      {"i1", Manifold::initial, {0, 0, 0},
       [](const Vector& pt) {
         return std::sin(kPi * pt(0)) + 0.5 * std::sin(4.0 * kPi * pt(0));
       }},
      {"i2", Manifold::initial, {0, 1, 1}, zero}};
  p.boundary_conditions = {{"b", Manifold::boundary, {0, 0, 0}, zero}};
  p.unknown_names = {"c_sq"};
  p.true_unknowns = Vector::Constant(1, kWaveSpeed * kWaveSpeed);
  return p;
}

ProblemSpec make_beam() {
  ProblemSpec p = one_dimensional(ProblemId::beam);
  p.residual_spec = DerivSpec(2, 1, {{0, 1, 2}, {0, 0, 4}});
  p.initial_conditions = {
      {"i1", Manifold::initial, {0, 0, 0}, [](const Vector& pt) { return std::sin(kPi * pt(0)); }},
      {"i2", Manifold::initial, {0, 1, 1}, zero}};
  p.boundary_conditions = {{"b1", Manifold::boundary, {0, 0, 0}, zero},
                           {"b2", Manifold::boundary, {0, 0, 2}, zero}};
  p.unknown_names = {"alpha_sq"};
  p.true_unknowns = Vector::Constant(1, kBeamAlpha * kBeamAlpha);
  return p;
}

// Inputs (x, y, t); outputs (u, v, p).
ProblemSpec make_navier_stokes(bool external_data) {
  ProblemSpec p;
  p.id = ProblemId::navier_stokes;
  p.input_names = {"x", "y", "t"};
  p.time_input = 2;
  p.output_names = {"u", "v", "p"};
  p.observed_outputs = 2;
  if (external_data) {
    p.domain = {{1.0, 8.0}, {-2.0, 2.0}, {0.0, 7.0}};
  } else {
    p.domain = {{0.0, 2.0 * kPi}, {0.0, 2.0 * kPi}, {0.0, 1.0}};
  }
  std::vector<Partial> entries;
  for (int c = 0; c < 2; ++c) {
    entries.push_back({c, 0, 0});
    entries.push_back({c, 2, 1});
    entries.push_back({c, 0, 1});
    entries.push_back({c, 1, 1});
    entries.push_back({c, 0, 2});
    entries.push_back({c, 1, 2});
  }
  entries.push_back({2, 0, 1});
  entries.push_back({2, 1, 1});
  p.residual_spec = DerivSpec(3, 3, std::move(entries));
  p.residual_terms = {"r1", "r2", "r3"};
  p.sources = {zero, zero, zero};
  p.data_terms = {"d1", "d2"};
  p.unknown_names = {"beta1", "beta2"};
  p.true_unknowns = Vector(2);
  p.true_unknowns << kNsBeta1, kNsBeta2;
  p.external_data = external_data;
  return p;
}

bool near(double a, double b) { return std::abs(a - b) <= kManifoldTolerance; }

}  // namespace

std::string to_string(ProblemId id) {
  switch (id) {
    case ProblemId::heat: return "heat";
    case ProblemId::wave: return "wave";
    case ProblemId::beam: return "beam";
    case ProblemId::navier_stokes: return "navier_stokes_2d";
  }
  return "?";
}

ProblemId parse_problem(std::string_view name) {
  if (name == "heat") return ProblemId::heat;
  if (name == "wave") return ProblemId::wave;
  if (name == "beam") return ProblemId::beam;
  if (name == "navier_stokes_2d" || name == "navier_stokes" || name == "ns") {
    return ProblemId::navier_stokes;
  }
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

std::vector<std::string> ProblemSpec::term_ids() const {
  std::vector<std::string> ids = residual_terms;
  for (const auto& c : initial_conditions) ids.push_back(c.term_id);
  for (const auto& c : boundary_conditions) ids.push_back(c.term_id);
  ids.insert(ids.end(), data_terms.begin(), data_terms.end());
  return ids;
}

DerivSpec ProblemSpec::condition_spec(Manifold manifold) const {
  const auto& ops = manifold == Manifold::initial ? initial_conditions : boundary_conditions;
  std::vector<Partial> entries;
  for (const auto& c : ops) entries.push_back(c.partial);
  return DerivSpec(input_dim(), output_dim(), std::move(entries));
}

std::vector<int> ProblemSpec::spatial_inputs() const {
  std::vector<int> out;
  for (int d = 0; d < input_dim(); ++d) {
    if (d != time_input) out.push_back(d);
  }
  return out;
}

ProblemSpec make_problem(ProblemId id, bool external_data) {
  if (external_data && id != ProblemId::navier_stokes) {
    throw ConfigError("external data ingestion is only supported for navier_stokes_2d");
  }
  switch (id) {
    case ProblemId::heat: return make_heat();
    case ProblemId::wave: return make_wave();
    case ProblemId::beam: return make_beam();
    case ProblemId::navier_stokes: return make_navier_stokes(external_data);
  }
  throw ConfigError("unknown problem id");
}

InverseParams init_inverse(const ProblemSpec& problem, std::uint64_t seed) {
  return init_inverse(problem.unknown_names, seed);
}

template <class T>
std::vector<T> residual(const ProblemSpec& problem, const BasicBundle<T>& b,
                        std::span<const T> gamma) {
  if (gamma.size() != problem.unknown_names.size()) {
    throw ContractError("expected " + std::to_string(problem.unknown_names.size()) +
                        " unknown coefficients");
  }
  switch (problem.id) {
    case ProblemId::heat:
      return {b(0, 1, 1) - gamma[0] * b(0, 0, 2)};
    case ProblemId::wave:
      return {b(0, 1, 2) - gamma[0] * b(0, 0, 2)};
    case ProblemId::beam:
      return {b(0, 1, 2) + gamma[0] * b(0, 0, 4)};
    case ProblemId::navier_stokes: {
      const T& u = b.value(0);
      const T& v = b.value(1);
      const T& beta1 = gamma[0];
      const T& beta2 = gamma[1];
      T f = b(0, 2, 1) + beta1 * (u * b(0, 0, 1) + v * b(0, 1, 1)) + b(2, 0, 1) -
            beta2 * (b(0, 0, 2) + b(0, 1, 2));
      T g = b(1, 2, 1) + beta1 * (u * b(1, 0, 1) + v * b(1, 1, 1)) + b(2, 1, 1) -
            beta2 * (b(1, 0, 2) + b(1, 1, 2));
      T h = b(0, 0, 1) + b(1, 1, 1);
      return {f, g, h};
    }
  }
  throw ContractError("unknown problem id");
}

template std::vector<double> residual(const ProblemSpec&, const BasicBundle<double>&,
                                      std::span<const double>);
template std::vector<Var> residual(const ProblemSpec&, const BasicBundle<Var>&,
                                   std::span<const Var>);

std::array<double, 3> taylor_green(const Vector& point, double viscosity) {
  if (!(viscosity > 0.0)) throw ContractError("Taylor-Green viscosity must be positive");
  const double x = point(0);
  const double y = point(1);
  const double t = point(2);
  const double decay = std::exp(-2.0 * viscosity * t);
  return {-std::cos(x) * std::sin(y) * decay, std::sin(x) * std::cos(y) * decay,
          -0.25 * (std::cos(2.0 * x) + std::cos(2.0 * y)) * decay * decay};
}

Vector analytic_solution(const ProblemSpec& problem, const Vector& point) {
  if (point.size() != problem.input_dim()) throw ContractError("point dimension mismatch");
  Vector out(problem.output_dim());
  switch (problem.id) {
    case ProblemId::heat: {
      const double beta = std::sqrt(problem.true_unknowns(0));
      const double rate = (10.0 * kPi * beta) * (10.0 * kPi * beta);
      out(0) = std::exp(-rate * point(1)) * std::sin(10.0 * kPi * point(0));
      return out;
    }
    case ProblemId::wave: {
      const double c = std::sqrt(problem.true_unknowns(0));
      const double x = point(0);
      const double t = point(1);
      out(0) = std::sin(kPi * x) * std::cos(c * kPi * t) +
               0.5 * std::sin(4.0 * kPi * x) * std::cos(4.0 * c * kPi * t);
      return out;
    }
    case ProblemId::beam: {
      const double alpha = std::sqrt(problem.true_unknowns(0));
      out(0) = std::sin(kPi * point(0)) * std::cos(alpha * kPi * kPi * point(1));
      return out;
    }
    case ProblemId::navier_stokes: {
      if (problem.external_data) {
        throw ContractError("no closed-form solution for externally supplied flow data");
      }
      const auto uvp = taylor_green(point, problem.true_unknowns(1));
      out << uvp[0], uvp[1], uvp[2];
      return out;
    }
  }
  throw ContractError("unknown problem id");
}

std::vector<std::pair<std::string, double>> ic_values(const ProblemSpec& problem,
                                                      const Vector& point) {
  if (problem.initial_conditions.empty()) return {};
  const double t0 = problem.domain[problem.time_input].first;
  if (!near(point(problem.time_input), t0)) {
    throw ContractError("point is not on the initial snapshot");
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : problem.initial_conditions) out.emplace_back(c.term_id, c.target(point));
  return out;
}

std::vector<std::pair<std::string, double>> bc_values(const ProblemSpec& problem,
                                                      const Vector& point) {
  if (problem.boundary_conditions.empty()) return {};
  bool on_boundary = false;
  for (int d : problem.spatial_inputs()) {
    const auto [lo, hi] = problem.domain[d];
    on_boundary = on_boundary || near(point(d), lo) || near(point(d), hi);
  }
  if (!on_boundary) throw ContractError("point is not on the spatial boundary");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : problem.boundary_conditions) out.emplace_back(c.term_id, c.target(point));
  return out;
}

}  // namespace dgpinn
