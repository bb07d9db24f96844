#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grb/sparse.hpp"

namespace grb {

/// Fraction of `mask` where preds and labels agree. Throws EmptyMask.
double subset_accuracy(std::span<const std::uint32_t> preds, std::span<const std::uint32_t> labels,
                       std::span<const NodeId> mask);

enum class SortOrder { Descending, Ascending };

/// w_i = (1/i^2) / sum_j (1/j^2) over the scores sorted by `order`.
std::vector<double> rank_weights(std::size_t n);
/// sum_i w_i s_i after sorting. An empty list scores 0.
double weighted_score(std::vector<double> scores, SortOrder order);

enum class Extreme { Max, Min };
/// Mean of the min(k, n) largest or smallest scores.
double avg_k_extreme(std::vector<double> scores, std::size_t k, Extreme side);

double mean(std::span<const double> values);
/// Population standard deviation.
double stddev(std::span<const double> values);

}  // namespace grb
