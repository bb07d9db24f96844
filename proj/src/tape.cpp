#include "grb/tape.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "grb/error.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace grb {

namespace {

#if defined(__GLIBC__)
// Every tape step allocates and frees a few hundred KB of node buffers. With
// glibc's default thresholds those pages go back to the kernel on each free
// and fault in again on the next step, which costs more than the arithmetic.
[[maybe_unused]] const bool kAllocatorTuned = [] {
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  return true;
}();
#endif

}  // namespace

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

}  // namespace

Var Tape::push(Node node) {
  for (auto p : node.parents) {
    if (nodes_[p].requires_grad) node.requires_grad = true;
  }
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::at(Var v) const {
  if (v.id >= nodes_.size()) throw Error(ErrorCode::InvalidArgument, "variable not on this tape");
  return nodes_[v.id];
}

const Matrix& Tape::grad(Var v) const { return at(v).grad; }

Var Tape::input(Matrix value, bool requires_grad) {
  Node n;
  n.kind = OpKind::Input;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

Var Tape::spmm(OperatorPtr op, Var x) {
  const Matrix& xv = at(x).value;
  require(op && op->dim() == static_cast<std::size_t>(xv.rows()),
          "spmm: operator dim " + std::to_string(op ? op->dim() : 0) + " vs operand " + shape(xv));
  Node n;
  n.kind = OpKind::Spmm;
  n.parents = {x.id};
  n.value = op->apply(xv);
  n.op = std::move(op);
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& av = at(a).value;
  const Matrix& bv = at(b).value;
  require(av.cols() == bv.rows(), "matmul: " + shape(av) + " * " + shape(bv));
  Node n;
  n.kind = OpKind::Matmul;
  n.parents = {a.id, b.id};
  n.value.noalias() = av * bv;
  return push(std::move(n));
}

Var Tape::add_bias(Var x, Var bias) {
  const Matrix& xv = at(x).value;
  const Matrix& bv = at(bias).value;
  require(bv.rows() == 1 && bv.cols() == xv.cols(), "add_bias: " + shape(xv) + " + " + shape(bv));
  Node n;
  n.kind = OpKind::AddBias;
  n.parents = {x.id, bias.id};
  n.value = xv.rowwise() + bv.row(0);
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.kind = OpKind::Relu;
  n.parents = {x.id};
  n.value = at(x).value.cwiseMax(0.0);
  return push(std::move(n));
}

Var Tape::layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  const Matrix& xv = at(x).value;
  const Matrix& gv = at(gain).value;
  const Matrix& bv = at(bias).value;
  require(gv.rows() == 1 && gv.cols() == xv.cols() && bv.rows() == 1 && bv.cols() == xv.cols(),
          "layer_norm_rows: " + shape(xv) + " with gain " + shape(gv) + ", bias " + shape(bv));
  Node n;
  n.kind = OpKind::LayerNormRows;
  n.parents = {x.id, gain.id, bias.id};
  const Eigen::Index rows = xv.rows();
  const double cols = static_cast<double>(xv.cols());
  n.saved.resize(rows, xv.cols());
  n.inv.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = xv.row(r).sum() / cols;
    const double var = (xv.row(r).array() - mean).square().sum() / cols;
    n.inv(r) = 1.0 / std::sqrt(var + eps);
    n.saved.row(r) = (xv.row(r).array() - mean) * n.inv(r);
  }
  n.value = (n.saved.array().rowwise() * gv.row(0).array()).rowwise() + bv.row(0).array();
  return push(std::move(n));
}

Var Tape::dropout(Var x, double rate) {
  if (!training_ || rate <= 0.0) return x;
  if (rate >= 1.0) throw Error(ErrorCode::InvalidArgument, "dropout rate must be < 1");
  const Matrix& xv = at(x).value;
  Node n;
  n.kind = OpKind::Dropout;
  n.parents = {x.id};
  n.saved.resize(xv.rows(), xv.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < n.saved.size(); ++i) {
    n.saved.data()[i] = rng_.uniform() < rate ? 0.0 : keep_scale;
  }
  n.value = xv.cwiseProduct(n.saved);
  return push(std::move(n));
}

Var Tape::log_softmax(Var x) {
  const Matrix& xv = at(x).value;
  Node n;
  n.kind = OpKind::LogSoftmax;
  n.parents = {x.id};
  n.value.resize(xv.rows(), xv.cols());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const double m = xv.row(r).maxCoeff();
    const double lse = m + std::log((xv.row(r).array() - m).exp().sum());
    n.value.row(r) = xv.row(r).array() - lse;
  }
  n.saved = n.value.array().exp();
  return push(std::move(n));
}

Var Tape::gather_rows(Var x, std::vector<NodeId> rows) {
  const Matrix& xv = at(x).value;
  Node n;
  n.kind = OpKind::GatherRows;
  n.parents = {x.id};
  n.value.resize(static_cast<Eigen::Index>(rows.size()), xv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < xv.rows(), "gather_rows: row " + std::to_string(rows[i]) + " of " + shape(xv));
    n.value.row(static_cast<Eigen::Index>(i)) = xv.row(rows[i]);
  }
  n.rows = std::move(rows);
  return push(std::move(n));
}

Var Tape::concat_rows(Var top, Var bottom) {
  const Matrix& tv = at(top).value;
  const Matrix& bv = at(bottom).value;
  require(tv.cols() == bv.cols(), "concat_rows: " + shape(tv) + " over " + shape(bv));
  Node n;
  n.kind = OpKind::ConcatRows;
  n.parents = {top.id, bottom.id};
  n.value.resize(tv.rows() + bv.rows(), tv.cols());
  n.value.topRows(tv.rows()) = tv;
  n.value.bottomRows(bv.rows()) = bv;
  return push(std::move(n));
}

Var Tape::scale_add(double a, Var x, double b, Var y) {
  const Matrix& xv = at(x).value;
  const Matrix& yv = at(y).value;
  require(xv.rows() == yv.rows() && xv.cols() == yv.cols(), "scale_add: " + shape(xv) + " vs " + shape(yv));
  Node n;
  n.kind = OpKind::ScaleAdd;
  n.parents = {x.id, y.id};
  n.a = a;
  n.b = b;
  n.value = a * xv + b * yv;
  return push(std::move(n));
}

Var Tape::nll_loss(Var log_probs, std::span<const NodeId> rows, std::span<const std::uint32_t> labels) {
  const Matrix& lp = at(log_probs).value;
  require(rows.size() == labels.size(), "nll_loss: rows/labels length mismatch");
  if (rows.empty()) throw Error(ErrorCode::EmptyMask, "nll_loss over an empty row set");
  Node n;
  n.kind = OpKind::NllLoss;
  n.parents = {log_probs.id};
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < lp.rows() && labels[i] < lp.cols(), "nll_loss: index out of range");
    total -= lp(rows[i], labels[i]);
  }
  n.value = Matrix::Constant(1, 1, total / static_cast<double>(rows.size()));
  n.rows.assign(rows.begin(), rows.end());
  n.labels.assign(labels.begin(), labels.end());
  return push(std::move(n));
}

Var Tape::margin_loss(Var logits, std::span<const NodeId> rows, std::span<const std::uint32_t> labels) {
  const Matrix& z = at(logits).value;
  require(rows.size() == labels.size(), "margin_loss: rows/labels length mismatch");
  require(z.cols() >= 2, "margin_loss needs at least two classes");
  Node n;
  n.kind = OpKind::MarginLoss;
  n.parents = {logits.id};
  n.saved.resize(static_cast<Eigen::Index>(rows.size()), 1);  // runner-up class, -1 if inactive
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < z.rows() && labels[i] < z.cols(), "margin_loss: index out of range");
    Eigen::Index runner = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      if (c == labels[i]) continue;
      if (z(rows[i], c) > best) {
        best = z(rows[i], c);
        runner = c;
      }
    }
    const double margin = z(rows[i], labels[i]) - best;
    if (margin > 0.0) {
      total += margin;
      n.saved(static_cast<Eigen::Index>(i), 0) = static_cast<double>(runner);
    } else {
      n.saved(static_cast<Eigen::Index>(i), 0) = -1.0;
    }
  }
  n.value = Matrix::Constant(1, 1, total);
  n.rows.assign(rows.begin(), rows.end());
  n.labels.assign(labels.begin(), labels.end());
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  Node n;
  n.kind = OpKind::Sum;
  n.parents = {x.id};
  n.value = Matrix::Constant(1, 1, at(x).value.sum());
  return push(std::move(n));
}

void Tape::accumulate(std::uint32_t parent, const Matrix& g) {
  Node& p = nodes_[parent];
  if (!p.requires_grad) return;
  p.grad += g;
}

void Tape::backward(Var loss) {
  const Node& l = at(loss);
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw Error(ErrorCode::NonScalarLoss, "loss is " + shape(l.value));
  }
  for (auto& n : nodes_) {
    if (n.requires_grad) {
      n.grad.setZero(n.value.rows(), n.value.cols());
    } else {
      n.grad.resize(0, 0);
    }
  }
  if (!l.requires_grad) return;
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::int64_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.requires_grad && n.kind != OpKind::Input) backward_node(n);
  }
}

void Tape::backward_node(Node& n) {
  const Matrix& g = n.grad;
  switch (n.kind) {
    case OpKind::Input:
      break;
    case OpKind::Spmm:
      accumulate(n.parents[0], n.op->apply_transpose(g));
      break;
    case OpKind::Matmul: {
      const Node& a = nodes_[n.parents[0]];
      const Node& b = nodes_[n.parents[1]];
      if (a.requires_grad) accumulate(n.parents[0], g * b.value.transpose());
      if (b.requires_grad) accumulate(n.parents[1], a.value.transpose() * g);
      break;
    }
    case OpKind::AddBias:
      accumulate(n.parents[0], g);
      if (nodes_[n.parents[1]].requires_grad) accumulate(n.parents[1], g.colwise().sum());
      break;
    case OpKind::Relu:
      accumulate(n.parents[0], (n.value.array() > 0.0).cast<double>().matrix().cwiseProduct(g));
      break;
    case OpKind::LayerNormRows: {
      const Matrix& gain = nodes_[n.parents[1]].value;
      if (nodes_[n.parents[0]].requires_grad) {
        const double cols = static_cast<double>(g.cols());
        Matrix dxhat = g.array().rowwise() * gain.row(0).array();
        Matrix dx(g.rows(), g.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          const double mean_d = dxhat.row(r).sum() / cols;
          const double mean_dx = dxhat.row(r).dot(n.saved.row(r)) / cols;
          dx.row(r) = n.inv(r) * (dxhat.row(r).array() - mean_d - n.saved.row(r).array() * mean_dx);
        }
        accumulate(n.parents[0], dx);
      }
      if (nodes_[n.parents[1]].requires_grad) accumulate(n.parents[1], g.cwiseProduct(n.saved).colwise().sum());
      if (nodes_[n.parents[2]].requires_grad) accumulate(n.parents[2], g.colwise().sum());
      break;
    }
    case OpKind::Dropout:
      accumulate(n.parents[0], g.cwiseProduct(n.saved));
      break;
    case OpKind::LogSoftmax: {
      Matrix dx = g;
      const Eigen::VectorXd row_sum = g.rowwise().sum();
      for (Eigen::Index r = 0; r < g.rows(); ++r) dx.row(r) -= row_sum(r) * n.saved.row(r);
      accumulate(n.parents[0], dx);
      break;
    }
    case OpKind::GatherRows: {
      const Node& x = nodes_[n.parents[0]];
      Matrix dx = Matrix::Zero(x.value.rows(), x.value.cols());
      for (std::size_t i = 0; i < n.rows.size(); ++i) dx.row(n.rows[i]) += g.row(static_cast<Eigen::Index>(i));
      accumulate(n.parents[0], dx);
      break;
    }
    case OpKind::ConcatRows: {
      const Eigen::Index top_rows = nodes_[n.parents[0]].value.rows();
      if (nodes_[n.parents[0]].requires_grad) accumulate(n.parents[0], g.topRows(top_rows));
      if (nodes_[n.parents[1]].requires_grad) accumulate(n.parents[1], g.bottomRows(g.rows() - top_rows));
      break;
    }
    case OpKind::ScaleAdd:
      if (nodes_[n.parents[0]].requires_grad) accumulate(n.parents[0], n.a * g);
      if (nodes_[n.parents[1]].requires_grad) accumulate(n.parents[1], n.b * g);
      break;
    case OpKind::NllLoss: {
      Node& p = nodes_[n.parents[0]];
      const double scale = g(0, 0) / static_cast<double>(n.rows.size());
      for (std::size_t i = 0; i < n.rows.size(); ++i) p.grad(n.rows[i], n.labels[i]) -= scale;
      break;
    }
    case OpKind::MarginLoss: {
      Node& p = nodes_[n.parents[0]];
      for (std::size_t i = 0; i < n.rows.size(); ++i) {
        const double runner = n.saved(static_cast<Eigen::Index>(i), 0);
        if (runner < 0.0) continue;
        p.grad(n.rows[i], n.labels[i]) += g(0, 0);
        p.grad(n.rows[i], static_cast<Eigen::Index>(runner)) -= g(0, 0);
      }
      break;
    }
    case OpKind::Sum:
      accumulate(n.parents[0], Matrix::Constant(nodes_[n.parents[0]].value.rows(),
                                                nodes_[n.parents[0]].value.cols(), g(0, 0)));
      break;
  }
}

double grad_check(const TapeFunction& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grad_check step must be positive");
  Matrix analytic;
  {
    Tape tape(false);
    Var xv = tape.input(x, true);
    Var loss = f(tape, xv);
    tape.backward(loss);
    analytic = tape.grad(xv);
    if (analytic.size() == 0) analytic = Matrix::Zero(x.rows(), x.cols());
  }
  auto eval = [&](const Matrix& point) {
    Tape tape(false);
    Var xv = tape.input(point, false);
    return tape.value(f(tape, xv))(0, 0);
  };
  double worst = 0.0;
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = eval(probe);
    probe.data()[i] = orig - h;
    const double down = eval(probe);
    probe.data()[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.data()[i];
    worst = std::max(worst, std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-8));
  }
  return worst;
}

}  // namespace grb
