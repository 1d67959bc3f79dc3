#pragma once

// Define-by-run reverse-mode differentiation over dense matrices.
//
// A Graph records operations as they are declared; values are produced by
// forward() in creation order (which is a topological order, since a node can
// only reference nodes created before it) and gradients by backward() in the
// reverse order. Parameter nodes point at externally owned Parameter objects
// and accumulate their gradient into Parameter::grad, so a mini-batch is a
// loop of independent graphs sharing the same parameters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "seqmtl/core/error.hpp"
#include "seqmtl/core/matrix.hpp"

namespace seqmtl {

/// A named trainable matrix together with its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Matrix(value.rows(), value.cols()); }
};

enum class Op {
  input,
  parameter,
  matmul,
  add,
  hadamard,
  sigmoid,
  tanh,
  concat_cols,
  row_select,
  logsumexp_row,
  scalar_scale,
  dropout_mask_apply,
  transpose,
  pick,
  sum_all,
};

struct NodeRef {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  bool operator==(const NodeRef&) const = default;
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Max-subtracted log(sum(exp(x))).
inline double logsumexp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

class Graph {
 public:
  struct Node {
    Op op = Op::input;
    std::array<std::size_t, 2> inputs{};
    std::size_t arity = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    double scale = 0.0;
    std::size_t r = 0;
    std::size_t c = 0;
    Matrix constant;  // input value or dropout mask
    Parameter* param = nullptr;
    Matrix value;
    Matrix grad;
    std::size_t evaluations = 0;
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  NodeRef input(Matrix value) {
    Node n;
    n.op = Op::input;
    n.rows = value.rows();
    n.cols = value.cols();
    n.constant = std::move(value);
    return push(std::move(n));
  }

  NodeRef parameter(Parameter& p) {
    Node n;
    n.op = Op::parameter;
    n.rows = p.value.rows();
    n.cols = p.value.cols();
    n.param = &p;
    return push(std::move(n));
  }

  NodeRef matmul(NodeRef a, NodeRef b) {
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.cols != nb.rows) mismatch("matmul", na, nb);
    return push(binary(Op::matmul, a, b, na.rows, nb.cols));
  }

  NodeRef add(NodeRef a, NodeRef b) { return elementwise(Op::add, a, b, "add"); }
  NodeRef hadamard(NodeRef a, NodeRef b) { return elementwise(Op::hadamard, a, b, "hadamard"); }

  NodeRef sigmoid(NodeRef a) { return push(unary(Op::sigmoid, a, at(a).rows, at(a).cols)); }
  NodeRef tanh(NodeRef a) { return push(unary(Op::tanh, a, at(a).rows, at(a).cols)); }

  NodeRef concat_cols(NodeRef a, NodeRef b) {
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.rows != nb.rows) mismatch("concat-cols", na, nb);
    return push(binary(Op::concat_cols, a, b, na.rows, na.cols + nb.cols));
  }

  NodeRef row_select(NodeRef a, std::size_t row) {
    const Node& na = at(a);
    if (row >= na.rows) throw Error(ErrorKind::index_out_of_range, "row-select beyond matrix rows");
    Node n = unary(Op::row_select, a, 1, na.cols);
    n.r = row;
    return push(std::move(n));
  }

  /// Per-row logsumexp: r x c -> r x 1.
  NodeRef logsumexp_row(NodeRef a) { return push(unary(Op::logsumexp_row, a, at(a).rows, 1)); }

  NodeRef scale(NodeRef a, double s) {
    Node n = unary(Op::scalar_scale, a, at(a).rows, at(a).cols);
    n.scale = s;
    return push(std::move(n));
  }

  NodeRef dropout(NodeRef a, Matrix mask) {
    const Node& na = at(a);
    if (mask.rows() != na.rows || mask.cols() != na.cols) {
      throw Error(ErrorKind::shape_mismatch,
                  "dropout mask " + mask.shape_string() + " vs operand " + shape(na));
    }
    Node n = unary(Op::dropout_mask_apply, a, na.rows, na.cols);
    n.constant = std::move(mask);
    return push(std::move(n));
  }

  NodeRef transpose(NodeRef a) { return push(unary(Op::transpose, a, at(a).cols, at(a).rows)); }

  NodeRef pick(NodeRef a, std::size_t row, std::size_t col) {
    const Node& na = at(a);
    if (row >= na.rows || col >= na.cols) {
      throw Error(ErrorKind::index_out_of_range, "pick outside " + shape(na));
    }
    Node n = unary(Op::pick, a, 1, 1);
    n.r = row;
    n.c = col;
    return push(std::move(n));
  }

  NodeRef sum(NodeRef a) { return push(unary(Op::sum_all, a, 1, 1)); }

  NodeRef sub(NodeRef a, NodeRef b) { return add(a, scale(b, -1.0)); }

  /// Evaluates every node the target depends on, each exactly once.
  const Matrix& evaluate(NodeRef target) {
    for (std::size_t i : reachable(target)) compute(i);
    return nodes_[target.index].value;
  }

  /// Evaluates a scalar root and returns its value.
  double forward(NodeRef root) {
    const Node& n = at(root);
    if (n.rows != 1 || n.cols != 1) {
      throw Error(ErrorKind::shape_mismatch, "forward root must be 1x1, got " + shape(n));
    }
    return evaluate(root)(0, 0);
  }

  /// Propagates d(root)/d(node) to every node reachable from root and adds the
  /// parameter gradients into the owning Parameter objects.
  void backward(NodeRef root) {
    Node& rn = at(root);
    if (rn.evaluations == 0) {
      throw Error(ErrorKind::backward_before_forward, "backward called before forward");
    }
    if (rn.rows != 1 || rn.cols != 1) {
      throw Error(ErrorKind::shape_mismatch, "backward root must be 1x1");
    }
    const auto order = reachable(root);
    for (auto& n : nodes_) n.grad = Matrix(n.rows, n.cols);
    rn.grad(0, 0) = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) propagate(*it);
    for (std::size_t i : order) {
      Node& n = nodes_[i];
      if (n.op != Op::parameter) continue;
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }

  const Matrix& value(NodeRef r) const { return nodes_.at(r.index).value; }
  const Matrix& grad(NodeRef r) const { return nodes_.at(r.index).grad; }
  Op op(NodeRef r) const { return nodes_.at(r.index).op; }
  std::size_t evaluations(NodeRef r) const { return nodes_.at(r.index).evaluations; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;

  static std::string shape(const Node& n) {
    return std::to_string(n.rows) + "x" + std::to_string(n.cols);
  }

  [[noreturn]] static void mismatch(const char* what, const Node& a, const Node& b) {
    throw Error(ErrorKind::shape_mismatch, std::string(what) + " " + shape(a) + " vs " + shape(b));
  }

  Node& at(NodeRef r) {
    if (r.index >= nodes_.size()) throw Error(ErrorKind::index_out_of_range, "dangling node reference");
    return nodes_[r.index];
  }
  const Node& at(NodeRef r) const {
    if (r.index >= nodes_.size()) throw Error(ErrorKind::index_out_of_range, "dangling node reference");
    return nodes_[r.index];
  }

  NodeRef push(Node n) {
    nodes_.push_back(std::move(n));
    return NodeRef{nodes_.size() - 1};
  }

  static Node unary(Op op, NodeRef a, std::size_t rows, std::size_t cols) {
    Node n;
    n.op = op;
    n.inputs[0] = a.index;
    n.arity = 1;
    n.rows = rows;
    n.cols = cols;
    return n;
  }

  static Node binary(Op op, NodeRef a, NodeRef b, std::size_t rows, std::size_t cols) {
    Node n = unary(op, a, rows, cols);
    n.inputs[1] = b.index;
    n.arity = 2;
    return n;
  }

  NodeRef elementwise(Op op, NodeRef a, NodeRef b, const char* what) {
    const Node& na = at(a);
    const Node& nb = at(b);
    if (na.rows != nb.rows || na.cols != nb.cols) mismatch(what, na, nb);
    return push(binary(op, a, b, na.rows, na.cols));
  }

  // Indices of the nodes the target depends on, ascending (= topological).
  std::vector<std::size_t> reachable(NodeRef target) const {
    at(target);
    std::vector<char> mark(target.index + 1, 0);
    mark[target.index] = 1;
    for (std::size_t i = target.index + 1; i-- > 0;) {
      if (!mark[i]) continue;
      const Node& n = nodes_[i];
      for (std::size_t k = 0; k < n.arity; ++k) mark[n.inputs[k]] = 1;
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i <= target.index; ++i) {
      if (mark[i]) order.push_back(i);
    }
    return order;
  }

  void compute(std::size_t i) {
    Node& n = nodes_[i];
    if (n.evaluations > 0) return;
    const Matrix* a = n.arity > 0 ? &nodes_[n.inputs[0]].value : nullptr;
    const Matrix* b = n.arity > 1 ? &nodes_[n.inputs[1]].value : nullptr;
    Matrix out(n.rows, n.cols);
    switch (n.op) {
      case Op::input:
        out = n.constant;
        break;
      case Op::parameter:
        if (n.param->value.rows() != n.rows || n.param->value.cols() != n.cols) {
          throw Error(ErrorKind::shape_mismatch, "parameter " + n.param->name + " changed shape");
        }
        out = n.param->value;
        break;
      case Op::matmul: {
        const std::size_t inner = a->cols();
        for (std::size_t r = 0; r < n.rows; ++r) {
          for (std::size_t k = 0; k < inner; ++k) {
            const double av = (*a)(r, k);
            if (av == 0.0) continue;
            for (std::size_t c = 0; c < n.cols; ++c) out(r, c) += av * (*b)(k, c);
          }
        }
        break;
      }
      case Op::add:
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*a)[k] + (*b)[k];
        break;
      case Op::hadamard:
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*a)[k] * (*b)[k];
        break;
      case Op::sigmoid:
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = seqmtl::sigmoid((*a)[k]);
        break;
      case Op::tanh:
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::tanh((*a)[k]);
        break;
      case Op::concat_cols:
        for (std::size_t r = 0; r < n.rows; ++r) {
          for (std::size_t c = 0; c < a->cols(); ++c) out(r, c) = (*a)(r, c);
          for (std::size_t c = 0; c < b->cols(); ++c) out(r, a->cols() + c) = (*b)(r, c);
        }
        break;
      case Op::row_select:
        for (std::size_t c = 0; c < n.cols; ++c) out(0, c) = (*a)(n.r, c);
        break;
      case Op::logsumexp_row:
        for (std::size_t r = 0; r < n.rows; ++r) out(r, 0) = logsumexp(a->row_view(r));
        break;
      case Op::scalar_scale:
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = n.scale * (*a)[k];
        break;
      case Op::dropout_mask_apply:
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*a)[k] * n.constant[k];
        break;
      case Op::transpose:
        for (std::size_t r = 0; r < n.rows; ++r) {
          for (std::size_t c = 0; c < n.cols; ++c) out(r, c) = (*a)(c, r);
        }
        break;
      case Op::pick:
        out(0, 0) = (*a)(n.r, n.c);
        break;
      case Op::sum_all:
        out(0, 0) = a->sum();
        break;
    }
    if (!out.all_finite()) {
      throw Error(ErrorKind::non_finite_value, "non-finite value at node " + std::to_string(i));
    }
    n.value = std::move(out);
    ++n.evaluations;
  }

  void propagate(std::size_t i) {
    Node& n = nodes_[i];
    if (n.arity == 0) return;
    const Matrix& g = n.grad;
    Matrix& ga = nodes_[n.inputs[0]].grad;
    const Matrix& a = nodes_[n.inputs[0]].value;
    switch (n.op) {
      case Op::input:
      case Op::parameter:
        break;
      case Op::matmul: {
        Matrix& gb = nodes_[n.inputs[1]].grad;
        const Matrix& b = nodes_[n.inputs[1]].value;
        const std::size_t inner = a.cols();
        for (std::size_t r = 0; r < n.rows; ++r) {
          for (std::size_t k = 0; k < inner; ++k) {
            double acc = 0.0;
            const double av = a(r, k);
            for (std::size_t c = 0; c < n.cols; ++c) {
              const double gv = g(r, c);
              acc += gv * b(k, c);
              gb(k, c) += av * gv;
            }
            ga(r, k) += acc;
          }
        }
        break;
      }
      case Op::add: {
        Matrix& gb = nodes_[n.inputs[1]].grad;
        for (std::size_t k = 0; k < g.size(); ++k) {
          ga[k] += g[k];
          gb[k] += g[k];
        }
        break;
      }
      case Op::hadamard: {
        Matrix& gb = nodes_[n.inputs[1]].grad;
        const Matrix& b = nodes_[n.inputs[1]].value;
        for (std::size_t k = 0; k < g.size(); ++k) {
          ga[k] += g[k] * b[k];
          gb[k] += g[k] * a[k];
        }
        break;
      }
      case Op::sigmoid:
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double s = n.value[k];
          ga[k] += g[k] * s * (1.0 - s);
        }
        break;
      case Op::tanh:
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double t = n.value[k];
          ga[k] += g[k] * (1.0 - t * t);
        }
        break;
      case Op::concat_cols: {
        Matrix& gb = nodes_[n.inputs[1]].grad;
        for (std::size_t r = 0; r < n.rows; ++r) {
          for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(r, c);
          for (std::size_t c = 0; c < gb.cols(); ++c) gb(r, c) += g(r, ga.cols() + c);
        }
        break;
      }
      case Op::row_select:
        for (std::size_t c = 0; c < n.cols; ++c) ga(n.r, c) += g(0, c);
        break;
      case Op::logsumexp_row:
        for (std::size_t r = 0; r < n.rows; ++r) {
          const double lse = n.value(r, 0);
          for (std::size_t c = 0; c < a.cols(); ++c) ga(r, c) += g(r, 0) * std::exp(a(r, c) - lse);
        }
        break;
      case Op::scalar_scale:
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += n.scale * g[k];
        break;
      case Op::dropout_mask_apply:
        for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * n.constant[k];
        break;
      case Op::transpose:
        for (std::size_t r = 0; r < n.rows; ++r) {
          for (std::size_t c = 0; c < n.cols; ++c) ga(c, r) += g(r, c);
        }
        break;
      case Op::pick:
        ga(n.r, n.c) += g(0, 0);
        break;
      case Op::sum_all:
        for (std::size_t k = 0; k < ga.size(); ++k) ga[k] += g(0, 0);
        break;
    }
  }
};

}  // namespace seqmtl
