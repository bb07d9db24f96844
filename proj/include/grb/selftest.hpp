#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grb/models.hpp"

namespace grb {

struct GradCheckResult {
  std::string model;  // e.g. "TAGCN+LN"
  double max_rel_error = 0.0;
};

/// Random 8-node graph (5 features, 3 classes) for gradient checks.
GraphBundle random_small_graph(std::uint64_t seed, std::size_t num_nodes = 8);

/// grad_check of the mean training cross-entropy w.r.t. the input features,
/// for one freshly initialized model.
double model_grad_check(const ModelSpec& spec, const GraphBundle& g, std::uint64_t seed);

/// Every architecture with and without LN.
std::vector<GradCheckResult> model_grad_checks(std::uint64_t seed);

/// Max |weighted_score - direct evaluation| over random score vectors of
/// length 1..20.
double metric_oracle_error(std::size_t trials, std::uint64_t seed);

}  // namespace grb
