#pragma once

#include <cstdint>

#include "grb/graph.hpp"
#include "grb/sparse.hpp"

namespace grb {

struct SvdOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 2;
  std::uint64_t seed = 0;
};

/// Rank-k approximation of a symmetric matrix by randomized subspace
/// iteration. The sketch uses the first k + oversampling columns of one
/// seeded Gaussian stream, so the subspaces are nested in k. Components are
/// ranked by |eigenvalue|, which equals the singular value for symmetric input.
Matrix low_rank_symmetric(const CsrMatrix& a, std::size_t k, const SvdOptions& opts = {});
Matrix low_rank_symmetric(const Matrix& a, std::size_t k, const SvdOptions& opts = {});

/// Exact rank-k truncation from a full symmetric eigendecomposition.
Matrix low_rank_dense_oracle(const Matrix& a, std::size_t k);

/// A graph whose adjacency has been replaced by its rank-k reconstruction.
/// The bundle keeps the original structure and attributes; `adjacency` is the
/// dense matrix used for inference and `op` its GCN normalization.
struct LowRankGraph {
  GraphBundle graph;
  Matrix adjacency;
  OperatorPtr op;
};

/// Throws RankTooLarge when k > N.
LowRankGraph svd_low_rank(const GraphBundle& g, std::size_t k, const SvdOptions& opts = {});

}  // namespace grb
