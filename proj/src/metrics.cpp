#include "grb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "grb/error.hpp"

namespace grb {

double subset_accuracy(std::span<const std::uint32_t> preds, std::span<const std::uint32_t> labels,
                       std::span<const NodeId> mask) {
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "accuracy over an empty node set");
  std::size_t hit = 0;
  for (NodeId v : mask) {
    if (v >= preds.size() || v >= labels.size()) {
      throw Error(ErrorCode::InvalidNode, "mask index " + std::to_string(v) + " out of range");
    }
    hit += preds[v] == labels[v] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(mask.size());
}

std::vector<double> rank_weights(std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 1.0 / (static_cast<double>(i + 1) * static_cast<double>(i + 1));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

double weighted_score(std::vector<double> scores, SortOrder order) {
  if (order == SortOrder::Descending) {
    std::sort(scores.begin(), scores.end(), std::greater<>());
  } else {
    std::sort(scores.begin(), scores.end());
  }
  const auto w = rank_weights(scores.size());
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) s += w[i] * scores[i];
  return s;
}

double avg_k_extreme(std::vector<double> scores, std::size_t k, Extreme side) {
  if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "avg_k_extreme of an empty list");
  if (side == Extreme::Max) {
    std::sort(scores.begin(), scores.end(), std::greater<>());
  } else {
    std::sort(scores.begin(), scores.end());
  }
  const std::size_t m = std::min(k, scores.size());
  return std::accumulate(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(m), 0.0) /
         static_cast<double>(m);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace grb
