#include "dgpinn/tape.hpp"

#include "dgpinn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace dgpinn {

namespace {

Vector chunked_row_sum(const Matrix& m) {
  Vector out = Vector::Zero(m.rows());
  for (Index c0 = 0; c0 < m.cols(); c0 += kReductionChunk) {
    const Index width = std::min(kReductionChunk, m.cols() - c0);
    out += m.middleCols(c0, width).rowwise().sum();
  }
  return out;
}

// d * a^T, reduced over sample columns block by block.
Matrix chunked_outer(const Matrix& d, const Matrix& a) {
  Matrix out = Matrix::Zero(d.rows(), a.rows());
  for (Index c0 = 0; c0 < d.cols(); c0 += kReductionChunk) {
    const Index width = std::min(kReductionChunk, d.cols() - c0);
    out.noalias() += d.middleCols(c0, width) * a.middleCols(c0, width).transpose();
  }
  return out;
}

double chunked_dot(const Matrix& a, const Matrix& b) {
  double total = 0.0;
  for (Index c0 = 0; c0 < a.cols(); c0 += kReductionChunk) {
    const Index width = std::min(kReductionChunk, a.cols() - c0);
    total += a.middleCols(c0, width).cwiseProduct(b.middleCols(c0, width)).sum();
  }
  return total;
}

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

Matrix tanh_matrix(const Matrix& z) {
  return (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix();
}

Tape& Var::tape() const {
  if (tape_ == nullptr) throw UsageError("Var is not recorded on a tape");
  return *tape_;
}

const Matrix& Var::value() const { return tape().node(*this).value; }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ContractError("scalar() on a " + shape(v) + " value");
  return v(0, 0);
}

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::parameter: return "parameter";
    case Op::constant: return "constant";
    case Op::matmul: return "matmul";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::cwise_mul: return "cwise_mul";
    case Op::scalar_mul: return "scalar_mul";
    case Op::scale: return "scale";
    case Op::add_bias: return "add_bias";
    case Op::tanh: return "tanh";
    case Op::one_minus_square: return "one_minus_square";
    case Op::row: return "row";
    case Op::mean_square: return "mean_square";
  }
  return "?";
}

std::string Tape::describe(std::size_t i) const {
  std::ostringstream os;
  os << "node #" << i << " (" << op_name(nodes_[i].op);
  if (!nodes_[i].label.empty()) os << " '" << nodes_[i].label << "'";
  os << ", " << shape(nodes_[i].value) << ")";
  return os.str();
}

const Tape::Node& Tape::node(const Var& v) const {
  if (v.tape_ != this) throw UsageError("Var belongs to a different tape");
  return nodes_[v.index_];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  swept_ = false;
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value, Index slot, std::string label) {
  if (slot < 0) throw ContractError("parameter slot must be non-negative");
  Node n{Op::parameter};
  n.slot = slot;
  n.needs_grad = true;
  n.value = std::move(value);
  n.label = std::move(label);
  return push(std::move(n));
}

Var Tape::constant(Matrix value) {
  Node n{Op::constant};
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::matmul(const Var& a, const Var& b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.cols() != nb.value.rows()) {
    throw ContractError("matmul shape mismatch: " + shape(na.value) + " * " + shape(nb.value));
  }
  Node n{Op::matmul, a.index_, b.index_};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value.noalias() = na.value * nb.value;
  return push(std::move(n));
}

Var Tape::add(const Var& a, const Var& b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ContractError("add shape mismatch: " + shape(na.value) + " + " + shape(nb.value));
  }
  Node n{Op::add, a.index_, b.index_};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value + nb.value;
  return push(std::move(n));
}

Var Tape::sub(const Var& a, const Var& b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ContractError("sub shape mismatch: " + shape(na.value) + " - " + shape(nb.value));
  }
  Node n{Op::sub, a.index_, b.index_};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value - nb.value;
  return push(std::move(n));
}

Var Tape::cwise_mul(const Var& a, const Var& b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.value.rows() != nb.value.rows() || na.value.cols() != nb.value.cols()) {
    throw ContractError("cwise_mul shape mismatch: " + shape(na.value) + " .* " +
                        shape(nb.value));
  }
  Node n{Op::cwise_mul, a.index_, b.index_};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value.cwiseProduct(nb.value);
  return push(std::move(n));
}

Var Tape::scalar_mul(const Var& s, const Var& a) {
  const Node& ns = node(s);
  const Node& na = node(a);
  if (ns.value.size() != 1) throw ContractError("scalar_mul needs a 1x1 coefficient");
  Node n{Op::scalar_mul, s.index_, a.index_};
  n.needs_grad = ns.needs_grad || na.needs_grad;
  n.value = ns.value(0, 0) * na.value;
  return push(std::move(n));
}

Var Tape::scale(const Var& a, double factor) {
  const Node& na = node(a);
  Node n{Op::scale, a.index_};
  n.factor = factor;
  n.needs_grad = na.needs_grad;
  n.value = factor * na.value;
  return push(std::move(n));
}

Var Tape::add_bias(const Var& a, const Var& bias) {
  const Node& na = node(a);
  const Node& nb = node(bias);
  if (nb.value.cols() != 1 || nb.value.rows() != na.value.rows()) {
    throw ContractError("add_bias shape mismatch: " + shape(na.value) + " + " +
                        shape(nb.value));
  }
  Node n{Op::add_bias, a.index_, bias.index_};
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.value = na.value.colwise() + nb.value.col(0);
  return push(std::move(n));
}

Var Tape::tanh(const Var& a) {
  const Node& na = node(a);
  Node n{Op::tanh, a.index_};
  n.needs_grad = na.needs_grad;
  n.value = tanh_matrix(na.value);
  return push(std::move(n));
}

Var Tape::one_minus_square(const Var& a) {
  const Node& na = node(a);
  Node n{Op::one_minus_square, a.index_};
  n.needs_grad = na.needs_grad;
  n.value = (1.0 - na.value.array().square()).matrix();
  return push(std::move(n));
}

Var Tape::row(const Var& a, Index i) {
  const Node& na = node(a);
  if (i < 0 || i >= na.value.rows()) throw ContractError("row index out of range");
  Node n{Op::row, a.index_};
  n.slot = i;
  n.needs_grad = na.needs_grad;
  n.value = na.value.row(i);
  return push(std::move(n));
}

Var Tape::mean_square(const Var& a) {
  const Node& na = node(a);
  if (na.value.size() == 0) throw ContractError("mean_square of an empty value");
  Node n{Op::mean_square, a.index_};
  n.needs_grad = na.needs_grad;
  n.value = Matrix::Constant(1, 1, chunked_dot(na.value, na.value) /
                                       static_cast<double>(na.value.size()));
  return push(std::move(n));
}

void Tape::accumulate(std::size_t target, Matrix contribution) {
  Matrix& adj = adjoint_[target];
  if (adj.size() == 0) {
    adj = std::move(contribution);
  } else {
    adj += contribution;
  }
}

void Tape::pass_through(std::size_t target, std::size_t k, bool keep) {
  Matrix& adj = adjoint_[target];
  if (adj.size() != 0) {
    adj += adjoint_[k];
  } else if (keep || target == k) {
    adj = adjoint_[k];
  } else {
    adj = std::move(adjoint_[k]);
  }
}

void Tape::reverse_sweep(std::size_t root, bool per_sample) {
  adjoint_.assign(nodes_.size(), Matrix());
  if (per_sample) per_sample_.assign(nodes_.size(), PerSampleTerms{});
  const Matrix& root_value = nodes_[root].value;
  adjoint_[root] = Matrix::Ones(root_value.rows(), root_value.cols());

  auto is_param = [&](std::size_t i) { return nodes_[i].op == Op::parameter; };
  auto reject_param = [&](std::size_t i, std::size_t parent) {
    if (per_sample && is_param(parent)) {
      throw UsageError("per-sample sweep: parameter " + describe(parent) + " enters " +
                       describe(i) + ", which mixes samples");
    }
  };

  for (std::size_t k = root + 1; k-- > 0;) {
    const Node& n = nodes_[k];
    if (!n.needs_grad || n.op == Op::parameter) continue;
    const Matrix& adj = adjoint_[k];
    if (adj.size() == 0) continue;
    const Node& lhs = nodes_[n.lhs];
    const Node& rhs = nodes_[n.rhs];

    switch (n.op) {
      case Op::parameter:
      case Op::constant:
        break;
      case Op::matmul:
        if (lhs.needs_grad) {
          if (per_sample && is_param(n.lhs)) {
            if (is_param(n.rhs)) reject_param(k, n.rhs);
            per_sample_[n.lhs].matmul.emplace_back(k, n.rhs);
          } else {
            accumulate(n.lhs, chunked_outer(adj, rhs.value));
          }
        }
        if (rhs.needs_grad) {
          reject_param(k, n.rhs);
          accumulate(n.rhs, lhs.value.transpose() * adj);
        }
        break;
      case Op::add:
        reject_param(k, n.lhs);
        reject_param(k, n.rhs);
        if (rhs.needs_grad) pass_through(n.rhs, k, per_sample || lhs.needs_grad);
        if (lhs.needs_grad) pass_through(n.lhs, k, per_sample);
        break;
      case Op::sub:
        reject_param(k, n.lhs);
        reject_param(k, n.rhs);
        if (rhs.needs_grad) accumulate(n.rhs, -adj);
        if (lhs.needs_grad) pass_through(n.lhs, k, per_sample);
        break;
      case Op::cwise_mul:
        reject_param(k, n.lhs);
        reject_param(k, n.rhs);
        if (lhs.needs_grad) accumulate(n.lhs, adj.cwiseProduct(rhs.value));
        if (rhs.needs_grad) accumulate(n.rhs, adj.cwiseProduct(lhs.value));
        break;
      case Op::scalar_mul:
        if (lhs.needs_grad) {
          if (per_sample && is_param(n.lhs)) {
            per_sample_[n.lhs].scalar.push_back(
                adj.cwiseProduct(rhs.value).colwise().sum());
          } else {
            accumulate(n.lhs, Matrix::Constant(1, 1, chunked_dot(adj, rhs.value)));
          }
        }
        if (rhs.needs_grad) {
          reject_param(k, n.rhs);
          accumulate(n.rhs, lhs.value(0, 0) * adj);
        }
        break;
      case Op::scale:
        reject_param(k, n.lhs);
        accumulate(n.lhs, n.factor * adj);
        break;
      case Op::add_bias:
        if (rhs.needs_grad) {
          if (per_sample && is_param(n.rhs)) {
            per_sample_[n.rhs].bias.push_back(k);
          } else {
            accumulate(n.rhs, chunked_row_sum(adj));
          }
        }
        if (lhs.needs_grad) {
          reject_param(k, n.lhs);
          pass_through(n.lhs, k, per_sample);
        }
        break;
      case Op::tanh:
        reject_param(k, n.lhs);
        accumulate(n.lhs, adj.cwiseProduct((1.0 - n.value.array().square()).matrix()));
        break;
      case Op::one_minus_square:
        reject_param(k, n.lhs);
        accumulate(n.lhs, -2.0 * adj.cwiseProduct(lhs.value));
        break;
      case Op::row: {
        reject_param(k, n.lhs);
        Matrix& target = adjoint_[n.lhs];
        if (target.size() == 0) target = Matrix::Zero(lhs.value.rows(), lhs.value.cols());
        target.row(n.slot) += adj;
        break;
      }
      case Op::mean_square:
        reject_param(k, n.lhs);
        accumulate(n.lhs, (2.0 * adj(0, 0) / static_cast<double>(lhs.value.size())) *
                              lhs.value);
        break;
    }
  }
}

void Tape::backward(const Var& root) {
  if (!root.valid() || nodes_.empty()) throw UsageError("backward before forward");
  const Node& r = node(root);
  if (r.value.size() != 1) {
    throw UsageError("backward needs a scalar root, got " + shape(r.value));
  }
  if (!std::isfinite(r.value(0, 0))) check_finite(root);
  reverse_sweep(root.index_, false);
  swept_ = true;
}

Vector Tape::gradient(Index n) const {
  if (!swept_) throw UsageError("gradient requested before backward");
  Vector g = Vector::Zero(n);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node_i = nodes_[i];
    if (node_i.op != Op::parameter) continue;
    const Index size = node_i.value.size();
    if (node_i.slot + size > n) {
      throw ContractError("parameter " + describe(i) + " exceeds gradient length");
    }
    const Matrix& adj = adjoint_[i];
    if (adj.size() == 0) continue;
    g.segment(node_i.slot, size) += Eigen::Map<const Vector>(adj.data(), size);
  }
  return g;
}

double Tape::per_sample_gradient_sq_norm(const Var& root) {
  if (!root.valid() || nodes_.empty()) throw UsageError("per-sample sweep before forward");
  const Node& r = node(root);
  if (r.value.rows() != 1) throw UsageError("per-sample sweep needs a 1xN root");
  check_finite(root);
  reverse_sweep(root.index_, true);
  swept_ = false;

  double total = 0.0;
  for (std::size_t leaf = 0; leaf < per_sample_.size(); ++leaf) {
    const PerSampleTerms& terms = per_sample_[leaf];
    const int kinds = int(!terms.matmul.empty()) + int(!terms.bias.empty()) +
                      int(!terms.scalar.empty());
    if (kinds > 1) {
      throw UsageError("per-sample sweep: parameter " + describe(leaf) +
                       " used through several operation kinds");
    }
    // |sum_c D_c[:,k] B_c[:,k]^T|_F^2 = sum_{c,c'} (D_c.D_c')(B_c.B_c') per column.
    for (std::size_t c = 0; c < terms.matmul.size(); ++c) {
      for (std::size_t d = c; d < terms.matmul.size(); ++d) {
        const Matrix& dc = adjoint_[terms.matmul[c].first];
        const Matrix& dd = adjoint_[terms.matmul[d].first];
        const Matrix& bc = nodes_[terms.matmul[c].second].value;
        const Matrix& bd = nodes_[terms.matmul[d].second].value;
        const Eigen::RowVectorXd delta_dot = dc.cwiseProduct(dd).colwise().sum();
        const Eigen::RowVectorXd input_dot = bc.cwiseProduct(bd).colwise().sum();
        const double pair = delta_dot.cwiseProduct(input_dot).sum();
        total += (c == d ? 1.0 : 2.0) * pair;
      }
    }
    if (!terms.bias.empty()) {
      Matrix sum = adjoint_[terms.bias.front()];
      for (std::size_t c = 1; c < terms.bias.size(); ++c) sum += adjoint_[terms.bias[c]];
      total += sum.squaredNorm();
    }
    if (!terms.scalar.empty()) {
      Matrix sum = terms.scalar.front();
      for (std::size_t c = 1; c < terms.scalar.size(); ++c) sum += terms.scalar[c];
      total += sum.squaredNorm();
    }
  }
  per_sample_.clear();
  return total;
}

void Tape::check_finite(const Var& v) const {
  const Node& n = node(v);
  if (n.value.allFinite()) return;
  for (std::size_t i = 0; i <= v.index_; ++i) {
    if (!nodes_[i].value.allFinite()) {
      throw EvaluationError("non-finite value at " + describe(i));
    }
  }
  throw EvaluationError("non-finite value at " + describe(v.index_));
}

Var operator+(const Var& a, const Var& b) { return a.tape().add(a, b); }
Var operator-(const Var& a, const Var& b) { return a.tape().sub(a, b); }

Var operator*(const Var& a, const Var& b) {
  const bool a_scalar = a.rows() == 1 && a.cols() == 1;
  const bool b_scalar = b.rows() == 1 && b.cols() == 1;
  if (a_scalar && !b_scalar) return a.tape().scalar_mul(a, b);
  if (b_scalar && !a_scalar) return a.tape().scalar_mul(b, a);
  return a.tape().cwise_mul(a, b);
}

Var operator*(double c, const Var& a) { return a.tape().scale(a, c); }
Var operator*(const Var& a, double c) { return a.tape().scale(a, c); }
Var operator-(const Var& a) { return a.tape().scale(a, -1.0); }

}  // namespace dgpinn
