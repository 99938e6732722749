#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dgpinn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Column count of the blocks used for every reduction over samples. Sums are
/// formed per block and then combined left to right, so results do not depend
/// on how evaluation is scheduled.
inline constexpr Index kReductionChunk = 1024;

/// Elementwise tanh through the vectorized exponential, saturating to +-1.
Matrix tanh_matrix(const Matrix& z);

class Tape;

/// Handle to a matrix value recorded on a Tape.
///
/// Columns index sample points throughout the library; every recorded
/// operation except parameter products treats columns independently.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const;
  std::size_t index() const noexcept { return index_; }
  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Reverse-mode recording of matrix operations.
///
/// Leaves created with parameter() are bound to a slot of the flat
/// optimization vector; backward() fills gradients for those slots. A tape is
/// single-writer; distinct tapes are independent.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf whose entries occupy [slot, slot + size) of the flat
  /// vector in column-major order.
  Var parameter(Matrix value, Index slot, std::string label);
  Var constant(Matrix value);

  Var matmul(const Var& a, const Var& b);
  Var add(const Var& a, const Var& b);
  Var sub(const Var& a, const Var& b);
  Var cwise_mul(const Var& a, const Var& b);
  /// s * a with s a 1x1 node.
  Var scalar_mul(const Var& s, const Var& a);
  Var scale(const Var& a, double factor);
  /// a + bias * 1^T with bias a column vector.
  Var add_bias(const Var& a, const Var& bias);
  Var tanh(const Var& a);
  /// 1 - a.^2
  Var one_minus_square(const Var& a);
  Var row(const Var& a, Index i);
  /// Mean of squared entries, as a 1x1 node.
  Var mean_square(const Var& a);

  /// Reverse sweep from a 1x1 root; afterwards gradient() is available.
  void backward(const Var& root);

  /// Flat gradient of length n. Slots of leaves the root does not depend on
  /// are exactly zero.
  Vector gradient(Index n) const;

  /// Sum over columns k of |d root_k / d Theta|^2 for a 1xN root, using a
  /// single reverse sweep seeded with ones.
  ///
  /// Exact because columns interact only through parameters, and parameters
  /// may enter only through matmul (left operand), add_bias or scalar_mul.
  double per_sample_gradient_sq_norm(const Var& root);

  /// Throws EvaluationError naming the first recorded node holding a
  /// non-finite entry, if v contains one.
  void check_finite(const Var& v) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class Var;

  enum class Op : std::uint8_t {
    parameter,
    constant,
    matmul,
    add,
    sub,
    cwise_mul,
    scalar_mul,
    scale,
    add_bias,
    tanh,
    one_minus_square,
    row,
    mean_square,
  };

  struct Node {
    Op op;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    double factor = 0.0;
    Index slot = -1;
    bool needs_grad = false;
    Matrix value{};
    std::string label{};
  };

  static const char* op_name(Op op);
  std::string describe(std::size_t i) const;
  const Node& node(const Var& v) const;
  Var push(Node n);
  void reverse_sweep(std::size_t root, bool per_sample);
  void accumulate(std::size_t target, Matrix contribution);
  // Hands node k's adjoint to `target` unchanged. Moves it when nothing
  // reads it later.
  void pass_through(std::size_t target, std::size_t k, bool keep);

  std::vector<Node> nodes_;
  std::vector<Matrix> adjoint_;
  bool swept_ = false;

  // Per-sample mode bookkeeping, keyed by leaf index.
  struct PerSampleTerms {
    std::vector<std::pair<std::size_t, std::size_t>> matmul;  // (node, rhs)
    std::vector<std::size_t> bias;                            // node
    std::vector<Matrix> scalar;                               // 1xN rows
  };
  std::vector<PerSampleTerms> per_sample_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
/// Elementwise product, or broadcast product when one side is 1x1.
Var operator*(const Var& a, const Var& b);
Var operator*(double c, const Var& a);
Var operator*(const Var& a, double c);
Var operator-(const Var& a);

}  // namespace dgpinn
