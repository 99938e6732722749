#pragma once

#include "dgpinn/tape.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dgpinn {

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

/// Weights and biases of a fully connected network with tanh hidden layers
/// and an affine output layer.
///
/// Flat layout, used by checkpoints and optimizers: for each layer in order,
/// the weight matrix in column-major order followed by the bias vector.
class NetworkParams {
 public:
  NetworkParams() = default;
  /// Zero-initialized network; widths = {inputs, hidden..., outputs}.
  explicit NetworkParams(std::vector<int> widths);

  const std::vector<int>& widths() const noexcept { return widths_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const DenseLayer& layer(std::size_t h) const { return layers_.at(h); }
  DenseLayer& layer(std::size_t h) { return layers_.at(h); }

  /// Total number of weights and biases.
  Index parameter_count() const noexcept { return count_; }
  /// Offset of layer h's weights in the flat layout; its bias follows the
  /// weights directly.
  Index weight_offset(std::size_t h) const { return offsets_.at(h); }

  Vector flatten() const;
  void assign(std::span<const double> flat);

 private:
  std::vector<int> widths_;
  std::vector<DenseLayer> layers_;
  std::vector<Index> offsets_;
  Index count_ = 0;
};

/// Unknown PDE coefficients, in the algebraic form the residual uses
/// (e.g. the squared diffusivity for the heat equation).
struct InverseParams {
  std::vector<std::string> names;
  Vector values;

  Index size() const noexcept { return values.size(); }
  double at(const std::string& name) const;
};

/// Theta = {network parameters, unknown coefficients}; the flat view puts the
/// network first, then the coefficients in declaration order.
struct TrainableState {
  NetworkParams network;
  InverseParams unknowns;

  Index size() const noexcept { return network.parameter_count() + unknowns.size(); }
  Vector flatten() const;
  void assign(std::span<const double> flat);
};

/// Uniform fan-in initialization: every weight and bias of layer h is drawn
/// i.i.d. from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
NetworkParams init_network(std::span<const int> widths, std::uint64_t seed);

/// Each coefficient drawn i.i.d. from U[0, 1).
InverseParams init_inverse(std::vector<std::string> names, std::uint64_t seed);

/// Widths {inputs, hidden x count, outputs}.
std::vector<int> layer_widths(int inputs, int hidden_layers, int hidden_width, int outputs);

Vector forward(const NetworkParams& params, const Vector& input);
/// Column-wise forward pass over an inputs x N matrix.
Matrix forward_batch(const NetworkParams& params, const Matrix& inputs);

/// Product of the spectral norms of the weight matrices; a Lipschitz bound of
/// the network map (tanh is 1-Lipschitz).
double lipschitz_bound(const NetworkParams& params);

}  // namespace dgpinn
