#include "dgpinn/network_eval.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace dgpinn {

namespace {

using Series = std::vector<std::optional<Var>>;

constexpr std::array<double, kMaxInputDerivativeOrder + 1> kFactorial{1.0, 1.0, 2.0, 6.0, 24.0};

std::optional<Var> sum_terms(std::optional<Var> acc, const Var& term) {
  if (!acc) return term;
  return *acc + term;
}

// Taylor coefficients of y = tanh(z) up to `order`, given those of z.
// k y_k = sum_{j=1..k} j z_j q_{k-j}, with q = 1 - y^2 expanded as
// q_0 = 1 - y_0^2 and q_m = -sum_{i=0..m} y_i y_{m-i}.
Series tanh_series(Tape& tape, const Series& z, const Var& y0, const Var& q0, int order) {
  Series y(order + 1);
  Series q(order + 1);
  y[0] = y0;
  q[0] = q0;
  for (int k = 1; k <= order; ++k) {
    std::optional<Var> acc;
    for (int j = 1; j <= k; ++j) {
      if (!z[j] || !q[k - j]) continue;
      acc = sum_terms(acc, tape.scale(tape.cwise_mul(*z[j], *q[k - j]), double(j) / k));
    }
    y[k] = acc;
    if (k == order) break;
    // q_k needs y_1..y_k; symmetric pairs are counted once and doubled.
    std::optional<Var> sq;
    for (int i = 0; 2 * i <= k; ++i) {
      const int other = k - i;
      if (!y[i] || !y[other]) continue;
      Var prod = tape.cwise_mul(*y[i], *y[other]);
      sq = sum_terms(sq, tape.scale(prod, i == other ? -1.0 : -2.0));
    }
    q[k] = sq;
  }
  return y;
}

}  // namespace

std::string to_string(const Partial& p) {
  return "d^" + std::to_string(p.order) + " out" + std::to_string(p.output) + "/d in" +
         std::to_string(p.input) + "^" + std::to_string(p.order);
}

DerivSpec::DerivSpec(int input_dim, int output_dim, std::vector<Partial> entries)
    : input_dim_(input_dim), output_dim_(output_dim), entries_(std::move(entries)) {
  if (input_dim_ < 1 || output_dim_ < 1) throw ContractError("DerivSpec needs positive widths");
  for (const Partial& p : entries_) {
    if (p.order < 0) throw ContractError("negative derivative order");
    if (p.order > kMaxInputDerivativeOrder) {
      throw ContractError("unsupported derivative order " + std::to_string(p.order) +
                          " (maximum " + std::to_string(kMaxInputDerivativeOrder) + ")");
    }
    if (p.output < 0 || p.output >= output_dim_) throw ContractError("output channel out of range");
    if (p.input < 0 || p.input >= input_dim_) {
      throw ContractError("input dimension " + std::to_string(p.input) + " not declared");
    }
  }
  // Order-0 entries are stored with input 0 so that each value has one key.
  for (Partial& p : entries_) {
    if (p.order == 0) p.input = 0;
  }
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

int DerivSpec::max_order(int input) const {
  int m = 0;
  for (const Partial& p : entries_) {
    if (p.input == input) m = std::max(m, p.order);
  }
  return m;
}

int DerivSpec::max_order() const {
  int m = 0;
  for (const Partial& p : entries_) m = std::max(m, p.order);
  return m;
}

NetworkVars bind_network(Tape& tape, const NetworkParams& params, Index offset) {
  NetworkVars vars;
  for (std::size_t h = 0; h < params.layer_count(); ++h) {
    const DenseLayer& l = params.layer(h);
    const Index slot = offset + params.weight_offset(h);
    vars.weights.push_back(tape.parameter(l.weights, slot, "W" + std::to_string(h + 1)));
    vars.biases.push_back(
        tape.parameter(l.bias, slot + l.weights.size(), "b" + std::to_string(h + 1)));
  }
  return vars;
}

DerivBundle eval_with_input_derivatives(Tape& tape, const NetworkVars& net,
                                        const Matrix& points, const DerivSpec& spec) {
  const std::size_t layers = net.weights.size();
  if (layers == 0) throw ContractError("empty network");
  if (points.rows() != net.weights.front().cols()) {
    throw ContractError("points have " + std::to_string(points.rows()) +
                        " coordinates, network expects " +
                        std::to_string(net.weights.front().cols()));
  }
  if (spec.input_dim() != points.rows() || spec.output_dim() != net.weights.back().rows()) {
    throw ContractError("DerivSpec does not match the network widths");
  }
  const Index n = points.cols();

  // Per differentiated input: coefficient series of the current layer input.
  std::vector<int> directions;
  for (int d = 0; d < spec.input_dim(); ++d) {
    if (spec.max_order(d) > 0) directions.push_back(d);
  }
  std::vector<Series> series(directions.size());
  for (std::size_t s = 0; s < directions.size(); ++s) {
    const int d = directions[s];
    series[s].assign(spec.max_order(d) + 1, std::nullopt);
    Matrix seed = Matrix::Zero(points.rows(), n);
    seed.row(d).setOnes();
    series[s][1] = tape.constant(std::move(seed));
  }

  Var activation = tape.constant(points);
  for (std::size_t h = 0; h < layers; ++h) {
    const Var& w = net.weights[h];
    Var z0 = tape.add_bias(tape.matmul(w, activation), net.biases[h]);
    std::vector<Series> z(series.size());
    for (std::size_t s = 0; s < series.size(); ++s) {
      z[s].resize(series[s].size());
      for (std::size_t k = 1; k < series[s].size(); ++k) {
        if (series[s][k]) z[s][k] = tape.matmul(w, *series[s][k]);
      }
    }
    if (h + 1 == layers) {
      activation = z0;
      for (std::size_t s = 0; s < series.size(); ++s) {
        for (std::size_t k = 1; k < series[s].size(); ++k) series[s][k] = z[s][k];
      }
      break;
    }
    Var y0 = tape.tanh(z0);
    Var q0 = series.empty() ? y0 : tape.one_minus_square(y0);
    for (std::size_t s = 0; s < series.size(); ++s) {
      const int order = static_cast<int>(series[s].size()) - 1;
      Series y = tanh_series(tape, z[s], y0, q0, order);
      for (int k = 1; k <= order; ++k) series[s][k] = y[k];
    }
    activation = y0;
  }

  DerivBundle bundle;
  for (int o = 0; o < spec.output_dim(); ++o) {
    Var v = tape.row(activation, o);
    tape.check_finite(v);
    bundle.insert({o, 0, 0}, v);
  }
  for (const Partial& p : spec.entries()) {
    if (p.order == 0) continue;
    const auto s = static_cast<std::size_t>(
        std::find(directions.begin(), directions.end(), p.input) - directions.begin());
    const std::optional<Var>& coeff = series[s][p.order];
    Var v = coeff ? tape.scale(tape.row(*coeff, p.output), kFactorial[p.order])
                  : tape.constant(Matrix::Zero(1, n));
    tape.check_finite(v);
    bundle.insert(p, v);
  }
  return bundle;
}

DerivValues eval_with_input_derivatives(const NetworkParams& params, const Vector& point,
                                        const DerivSpec& spec) {
  Tape tape;
  const NetworkVars net = bind_network(tape, params);
  const DerivBundle rows = eval_with_input_derivatives(tape, net, point, spec);
  DerivValues out;
  for (const auto& [p, v] : rows) out.insert(p, v.value()(0, 0));
  return out;
}

}  // namespace dgpinn
