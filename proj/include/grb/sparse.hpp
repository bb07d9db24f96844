#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace grb {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using NodeId = std::uint32_t;

/// Compressed sparse row matrix with real values. Column indices are sorted
/// within each row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<NodeId> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return col_idx.size(); }

  /// this * x, accumulated row by row in column order (fixed reduction order).
  Matrix multiply(const Matrix& x) const;
  CsrMatrix transpose() const;
  Matrix to_dense() const;
  bool is_symmetric(double tol = 0.0) const;
};

/// The propagation matrix a model multiplies node features with. Usually
/// sparse; the low-rank defense produces a dense one.
class PropagationOperator {
 public:
  static std::shared_ptr<const PropagationOperator> from_sparse(CsrMatrix m);
  static std::shared_ptr<const PropagationOperator> from_dense(Matrix m);

  std::size_t dim() const;
  bool is_dense() const { return std::holds_alternative<Matrix>(storage_); }
  bool is_symmetric() const { return symmetric_; }

  Matrix apply(const Matrix& x) const;
  Matrix apply_transpose(const Matrix& x) const;
  Matrix to_dense() const;

  const CsrMatrix* sparse() const { return std::get_if<CsrMatrix>(&storage_); }
  const Matrix* dense() const { return std::get_if<Matrix>(&storage_); }

 private:
  PropagationOperator() = default;

  std::variant<CsrMatrix, Matrix> storage_;
  CsrMatrix transpose_;  // only populated for non-symmetric sparse storage
  bool symmetric_ = true;
};

using OperatorPtr = std::shared_ptr<const PropagationOperator>;

}  // namespace grb
