#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "grb/rng.hpp"
#include "grb/sparse.hpp"

namespace grb {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

enum class OpKind {
  Input,
  Spmm,
  Matmul,
  AddBias,
  Relu,
  LayerNormRows,
  Dropout,
  LogSoftmax,
  GatherRows,
  ConcatRows,
  ScaleAdd,
  NllLoss,
  MarginLoss,
  Sum,
};

/// Eager reverse-mode tape over dense row-major matrices.
///
/// Every op computes its value immediately and appends a node; parents always
/// precede children, so backward is a single reverse sweep. Gradients are
/// only tracked for nodes that (transitively) depend on an input created with
/// requires_grad. A tape is single-threaded; sparse operators are shared
/// read-only and may be used by many tapes at once.
class Tape {
 public:
  explicit Tape(bool training = false, std::uint64_t seed = 0) : training_(training), rng_(seed) {}

  bool training() const { return training_; }
  std::size_t size() const { return nodes_.size(); }

  Var input(Matrix value, bool requires_grad = false);

  Var spmm(OperatorPtr op, Var x);
  Var matmul(Var a, Var b);
  /// x + bias, bias is a 1 x C row broadcast over rows.
  Var add_bias(Var x, Var bias);
  Var relu(Var x);
  /// Row-wise (x - mean) / sqrt(var + eps) * gain + bias; gain/bias are 1 x C.
  Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);
  /// Inverted dropout in training mode; returns x unchanged otherwise.
  Var dropout(Var x, double rate);
  Var log_softmax(Var x);
  Var gather_rows(Var x, std::vector<NodeId> rows);
  Var concat_rows(Var top, Var bottom);
  /// a * x + b * y
  Var scale_add(double a, Var x, double b, Var y);
  /// Mean over `rows` of -log_probs[row, label]; labels are parallel to rows.
  Var nll_loss(Var log_probs, std::span<const NodeId> rows, std::span<const std::uint32_t> labels);
  /// Sum over `rows` of max(0, z[row, label] - max_{c != label} z[row, c]).
  Var margin_loss(Var logits, std::span<const NodeId> rows, std::span<const std::uint32_t> labels);
  Var sum(Var x);

  /// Zeroes every gradient, then backpropagates from a 1 x 1 loss.
  void backward(Var loss);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient from the last backward call; empty if the node is not tracked.
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  OpKind kind(Var v) const { return nodes_.at(v.id).kind; }

 private:
  struct Node {
    OpKind kind = OpKind::Input;
    std::vector<std::uint32_t> parents;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    // Op-specific saved state.
    OperatorPtr op;
    std::vector<NodeId> rows;
    std::vector<std::uint32_t> labels;
    Matrix saved;         // dropout mask, LN normalized input, softmax, margin runner-up
    Eigen::VectorXd inv;  // LN inverse std per row
    double a = 0.0;
    double b = 0.0;
  };

  Var push(Node node);
  const Node& at(Var v) const;
  void accumulate(std::uint32_t parent, const Matrix& g);
  void backward_node(Node& node);

  bool training_;
  Rng rng_;
  std::vector<Node> nodes_;
};

/// Tape-built scalar function of one matrix input.
using TapeFunction = std::function<Var(Tape&, Var)>;

/// Max over entries of |g - g_fd| / (|g| + |g_fd| + 1e-8), where g comes from
/// backward and g_fd from central differences with step h. Tapes are built in
/// evaluation mode.
double grad_check(const TapeFunction& f, const Matrix& x, double h);

}  // namespace grb
