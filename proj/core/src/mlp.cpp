#include "dgpinn/mlp.hpp"

#include "dgpinn/errors.hpp"
#include "dgpinn/random.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <utility>

namespace dgpinn {

NetworkParams::NetworkParams(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ContractError("a network needs at least input and output widths");
  for (int w : widths_) {
    if (w < 1) throw ContractError("layer widths must be >= 1");
  }
  for (std::size_t h = 0; h + 1 < widths_.size(); ++h) {
    offsets_.push_back(count_);
    layers_.push_back({Matrix::Zero(widths_[h + 1], widths_[h]), Vector::Zero(widths_[h + 1])});
    count_ += Index(widths_[h + 1]) * widths_[h] + widths_[h + 1];
  }
}

Vector NetworkParams::flatten() const {
  Vector flat(count_);
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    const DenseLayer& l = layers_[h];
    flat.segment(offsets_[h], l.weights.size()) =
        Eigen::Map<const Vector>(l.weights.data(), l.weights.size());
    flat.segment(offsets_[h] + l.weights.size(), l.bias.size()) = l.bias;
  }
  return flat;
}

void NetworkParams::assign(std::span<const double> flat) {
  if (static_cast<Index>(flat.size()) != count_) {
    throw ContractError("flat network vector has " + std::to_string(flat.size()) +
                        " entries, expected " + std::to_string(count_));
  }
  for (std::size_t h = 0; h < layers_.size(); ++h) {
    DenseLayer& l = layers_[h];
    const double* base = flat.data() + offsets_[h];
    l.weights = Eigen::Map<const Matrix>(base, l.weights.rows(), l.weights.cols());
    l.bias = Eigen::Map<const Vector>(base + l.weights.size(), l.bias.size());
  }
}

double InverseParams::at(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values(static_cast<Index>(i));
  }
  throw ContractError("unknown coefficient '" + name + "'");
}

Vector TrainableState::flatten() const {
  Vector flat(size());
  flat.head(network.parameter_count()) = network.flatten();
  flat.tail(unknowns.size()) = unknowns.values;
  return flat;
}

void TrainableState::assign(std::span<const double> flat) {
  if (static_cast<Index>(flat.size()) != size()) {
    throw ContractError("flat state has " + std::to_string(flat.size()) + " entries, expected " +
                        std::to_string(size()));
  }
  const auto m = static_cast<std::size_t>(network.parameter_count());
  network.assign(flat.first(m));
  unknowns.values = Eigen::Map<const Vector>(flat.data() + m, unknowns.size());
}

NetworkParams init_network(std::span<const int> widths, std::uint64_t seed) {
  NetworkParams params(std::vector<int>(widths.begin(), widths.end()));
  Rng rng(seed);
  for (std::size_t h = 0; h < params.layer_count(); ++h) {
    DenseLayer& l = params.layer(h);
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.weights.cols()));
    for (Index j = 0; j < l.weights.cols(); ++j) {
      for (Index i = 0; i < l.weights.rows(); ++i) l.weights(i, j) = rng.uniform(-bound, bound);
    }
    for (Index i = 0; i < l.bias.size(); ++i) l.bias(i) = rng.uniform(-bound, bound);
  }
  return params;
}

InverseParams init_inverse(std::vector<std::string> names, std::uint64_t seed) {
  Rng rng(seed);
  InverseParams out{std::move(names), Vector(0)};
  out.values.resize(static_cast<Index>(out.names.size()));
  for (Index i = 0; i < out.values.size(); ++i) out.values(i) = rng.uniform();
  return out;
}

std::vector<int> layer_widths(int inputs, int hidden_layers, int hidden_width, int outputs) {
  std::vector<int> widths{inputs};
  for (int h = 0; h < hidden_layers; ++h) widths.push_back(hidden_width);
  widths.push_back(outputs);
  return widths;
}

Matrix forward_batch(const NetworkParams& params, const Matrix& inputs) {
  if (inputs.rows() != params.input_dim()) {
    throw ContractError("input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                        std::to_string(params.input_dim()));
  }
  Matrix activation = inputs;
  const std::size_t last = params.layer_count() - 1;
  for (std::size_t h = 0; h < params.layer_count(); ++h) {
    const DenseLayer& l = params.layer(h);
    Matrix z = l.weights * activation;
    z.colwise() += l.bias;
    activation = h == last ? std::move(z) : tanh_matrix(z);
  }
  return activation;
}

Vector forward(const NetworkParams& params, const Vector& input) {
  return forward_batch(params, input).col(0);
}

double lipschitz_bound(const NetworkParams& params) {
  double bound = 1.0;
  for (std::size_t h = 0; h < params.layer_count(); ++h) {
    Eigen::JacobiSVD<Matrix> svd(params.layer(h).weights);
    bound *= svd.singularValues()(0);
  }
  return bound;
}

}  // namespace dgpinn
