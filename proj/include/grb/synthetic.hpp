#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "grb/graph.hpp"

namespace grb {

/// Degree-corrected stochastic block model. Features are Gaussian noise plus a
/// mean shift on a class-specific set of "topic" columns.
struct SyntheticConfig {
  std::string name = "synthetic";
  std::size_t num_nodes = 1000;
  std::size_t num_edges = 2000;
  std::size_t num_features = 64;
  std::uint32_t num_classes = 4;
  double homophily = 0.8;         // probability an edge stays inside a class
  double pareto_alpha = 2.5;      // tail of the node propensities
  double max_propensity = 50.0;   // truncation of the Pareto draw
  std::size_t words_per_topic = 8;
  double signal = 0.5;            // mean shift on topic columns, in noise units
  std::uint64_t seed = 0;
};

std::vector<std::string> synthetic_dataset_names();
bool is_synthetic_dataset(std::string_view name);
/// Throws UnknownDataset.
SyntheticConfig synthetic_preset(std::string_view name);

/// Raw (unnormalized) features.
GraphBundle generate_synthetic(const SyntheticConfig& cfg);

}  // namespace grb
