#include "grb/svd.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "grb/error.hpp"
#include "grb/models.hpp"
#include "grb/rng.hpp"

namespace grb {

namespace {

void check_rank(std::size_t n, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "rank must be >= 1");
  if (k > n) {
    throw Error(ErrorCode::RankTooLarge, "rank " + std::to_string(k) + " exceeds matrix size " + std::to_string(n));
  }
}

// Keeps the k eigenpairs of largest magnitude and rebuilds V diag(l) V^T.
Matrix rebuild_top(const Eigen::VectorXd& values, const Matrix& vectors, std::size_t k) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) > std::abs(values(b)); });
  const auto keep = static_cast<Eigen::Index>(std::min<std::size_t>(k, order.size()));
  Matrix v(vectors.rows(), keep);
  Eigen::VectorXd l(keep);
  for (Eigen::Index i = 0; i < keep; ++i) {
    v.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
    l(i) = values(order[static_cast<std::size_t>(i)]);
  }
  Matrix out = v * l.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

template <typename Apply>
Matrix randomized(std::size_t n, std::size_t k, const SvdOptions& opts, Apply&& apply) {
  check_rank(n, k);
  const std::size_t l = std::min(n, k + opts.oversampling);
  // Column-major draw order keeps the first columns identical for every l.
  Rng rng(opts.seed);
  Matrix omega(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l));
  for (Eigen::Index c = 0; c < omega.cols(); ++c) {
    for (Eigen::Index r = 0; r < omega.rows(); ++r) omega(r, c) = rng.normal();
  }
  Matrix q = orthonormal_basis(apply(omega));
  for (std::size_t i = 0; i < opts.power_iterations; ++i) q = orthonormal_basis(apply(q));
  const Matrix aq = apply(q);
  Matrix b = q.transpose() * aq;
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
  const Matrix v = q * eig.eigenvectors();
  return rebuild_top(eig.eigenvalues(), v, k);
}

}  // namespace

Matrix low_rank_symmetric(const CsrMatrix& a, std::size_t k, const SvdOptions& opts) {
  if (a.rows != a.cols) throw Error(ErrorCode::ShapeMismatch, "low-rank input must be square");
  return randomized(a.rows, k, opts, [&](const Matrix& x) { return a.multiply(x); });
}

Matrix low_rank_symmetric(const Matrix& a, std::size_t k, const SvdOptions& opts) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "low-rank input must be square");
  return randomized(static_cast<std::size_t>(a.rows()), k, opts, [&](const Matrix& x) -> Matrix { return a * x; });
}

Matrix low_rank_dense_oracle(const Matrix& a, std::size_t k) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "oracle input must be square");
  check_rank(static_cast<std::size_t>(a.rows()), k);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  return rebuild_top(eig.eigenvalues(), eig.eigenvectors(), k);
}

LowRankGraph svd_low_rank(const GraphBundle& g, std::size_t k, const SvdOptions& opts) {
  LowRankGraph out;
  out.adjacency = low_rank_symmetric(g.adjacency_matrix(), k, opts);
  out.op = gcn_normalize_dense(out.adjacency);
  out.graph = g;
  return out;
}

}  // namespace grb
