#include "grb/sparse.hpp"

#include <stdexcept>

#include "grb/error.hpp"

namespace grb {

Matrix CsrMatrix::multiply(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != cols) {
    throw Error(ErrorCode::ShapeMismatch, "spmm: operator has " + std::to_string(cols) +
                                              " columns, dense operand has " +
                                              std::to_string(x.rows()) + " rows");
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), x.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    auto out_row = out.row(static_cast<Eigen::Index>(r));
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      out_row.noalias() += values[k] * x.row(col_idx[k]);
    }
  }
  return out;
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (NodeId c : col_idx) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Row-major traversal keeps the transposed rows sorted by column.
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      std::size_t dst = cursor[col_idx[k]]++;
      t.col_idx[dst] = static_cast<NodeId>(r);
      t.values[dst] = values[k];
    }
  }
  return t;
}

Matrix CsrMatrix::to_dense() const {
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      d(static_cast<Eigen::Index>(r), col_idx[k]) += values[k];
    }
  }
  return d;
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows != cols) return false;
  CsrMatrix t = transpose();
  if (t.col_idx != col_idx || t.row_ptr != row_ptr) return false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::abs(values[k] - t.values[k]) > tol) return false;
  }
  return true;
}

OperatorPtr PropagationOperator::from_sparse(CsrMatrix m) {
  if (m.rows != m.cols) throw Error(ErrorCode::ShapeMismatch, "propagation operator must be square");
  auto op = std::shared_ptr<PropagationOperator>(new PropagationOperator());
  op->symmetric_ = m.is_symmetric(1e-14);
  if (!op->symmetric_) op->transpose_ = m.transpose();
  op->storage_ = std::move(m);
  return op;
}

OperatorPtr PropagationOperator::from_dense(Matrix m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "propagation operator must be square");
  auto op = std::shared_ptr<PropagationOperator>(new PropagationOperator());
  op->symmetric_ = (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14;
  op->storage_ = std::move(m);
  return op;
}

std::size_t PropagationOperator::dim() const {
  if (const auto* s = sparse()) return s->rows;
  return static_cast<std::size_t>(dense()->rows());
}

Matrix PropagationOperator::apply(const Matrix& x) const {
  if (const auto* s = sparse()) return s->multiply(x);
  const Matrix& d = *dense();
  if (d.cols() != x.rows()) throw Error(ErrorCode::ShapeMismatch, "dense propagation: dimension mismatch");
  return d * x;
}

Matrix PropagationOperator::apply_transpose(const Matrix& x) const {
  if (symmetric_) return apply(x);
  if (sparse()) return transpose_.multiply(x);
  const Matrix& d = *dense();
  if (d.rows() != x.rows()) throw Error(ErrorCode::ShapeMismatch, "dense propagation: dimension mismatch");
  return d.transpose() * x;
}

Matrix PropagationOperator::to_dense() const {
  if (const auto* s = sparse()) return s->to_dense();
  return *dense();
}

}  // namespace grb
