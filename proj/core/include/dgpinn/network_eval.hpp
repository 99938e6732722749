#pragma once

#include "dgpinn/errors.hpp"
#include "dgpinn/mlp.hpp"
#include "dgpinn/tape.hpp"

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace dgpinn {

inline constexpr int kMaxInputDerivativeOrder = 4;

/// d^order (output) / d (input)^order. order 0 is the output value itself.
/// Mixed partials are not representable.
struct Partial {
  int output = 0;
  int input = 0;
  int order = 0;

  auto operator<=>(const Partial&) const = default;
};

std::string to_string(const Partial& p);

/// Requested input derivatives per output channel.
class DerivSpec {
 public:
  DerivSpec() = default;
  /// Throws ContractError for out-of-range channels or inputs and for orders
  /// above kMaxInputDerivativeOrder.
  DerivSpec(int input_dim, int output_dim, std::vector<Partial> entries);

  int input_dim() const noexcept { return input_dim_; }
  int output_dim() const noexcept { return output_dim_; }
  const std::vector<Partial>& entries() const noexcept { return entries_; }
  /// Highest order requested along one input (0 when none).
  int max_order(int input) const;
  int max_order() const;

 private:
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<Partial> entries_;
};

/// Map Partial -> value. T is Var for recorded batch evaluations and double
/// for plain single-point values.
template <class T>
class BasicBundle {
 public:
  void insert(const Partial& p, T value) { entries_.insert_or_assign(key(p), std::move(value)); }
  bool contains(const Partial& p) const { return entries_.count(key(p)) != 0; }
  const T& at(const Partial& p) const {
    auto it = entries_.find(key(p));
    if (it == entries_.end()) throw ContractError("derivative entry " + to_string(p) + " missing");
    return it->second;
  }
  const T& operator()(int output, int input, int order) const { return at({output, input, order}); }
  const T& value(int output) const { return at({output, 0, 0}); }
  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  // A zeroth-order entry is the output value whichever input it names.
  static Partial key(Partial p) {
    if (p.order == 0) p.input = 0;
    return p;
  }

  std::map<Partial, T> entries_;
};

/// Batch of derivative rows (each 1xN) recorded on a tape.
using DerivBundle = BasicBundle<Var>;
/// Derivatives at a single point.
using DerivValues = BasicBundle<double>;

/// Parameter leaves of a network on a tape.
struct NetworkVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

/// Records the network parameters as leaves whose slots start at `offset`
/// in the flat layout of NetworkParams.
NetworkVars bind_network(Tape& tape, const NetworkParams& params, Index offset = 0);

/// Every output value plus the requested input derivatives at the columns of
/// `points`.
///
/// Each input direction carries truncated Taylor coefficients through the
/// layers: affine maps act on every coefficient, and tanh coefficients follow
/// from y' = (1 - y^2) z' by matching powers. The k-th derivative is k! times
/// the k-th coefficient. Everything is recorded, so scalars built from the
/// bundle can be differentiated with respect to the parameters.
DerivBundle eval_with_input_derivatives(Tape& tape, const NetworkVars& net,
                                        const Matrix& points, const DerivSpec& spec);

/// Single-point convenience overload; nothing is kept for a backward sweep.
DerivValues eval_with_input_derivatives(const NetworkParams& params, const Vector& point,
                                        const DerivSpec& spec);

}  // namespace dgpinn
