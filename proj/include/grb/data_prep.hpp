#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grb/graph.hpp"

namespace grb {

enum class Difficulty { Easy, Medium, Hard, Full };
inline constexpr std::array<Difficulty, 4> kAllDifficulties{Difficulty::Easy, Difficulty::Medium,
                                                            Difficulty::Hard, Difficulty::Full};
std::string_view to_string(Difficulty d);  // "E", "M", "H", "F"
Difficulty parse_difficulty(std::string_view text);

/// Train/val pool plus three degree-stratified test subsets. All index sets
/// are sorted ascending.
struct DifficultySplit {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test_easy;
  std::vector<NodeId> test_medium;
  std::vector<NodeId> test_hard;
  std::uint64_t seed = 0;

  /// E ∪ M ∪ H, sorted.
  std::vector<NodeId> test_full() const;
  std::vector<NodeId> test(Difficulty d) const;
  /// train ∪ val, sorted; the node set visible while training.
  std::vector<NodeId> train_val() const;

  friend bool operator==(const DifficultySplit&, const DifficultySplit&) = default;
};

struct SplitConfig {
  double trim_fraction = 0.05;
  int partition_count = 3;
  double sample_fraction = 0.1;  // of all N, per partition
  double train_fraction = 0.6;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// (2/pi) * arctan((F - mean) / std). Statistics are global over the whole
/// matrix unless per_column is set. Output is strictly inside (-1, 1).
FeatureMatrix standardize_arctan(const FeatureMatrix& features, bool per_column = false);

/// Degree-stratified split: rank by (degree, id), trim both tails from test
/// candidacy, cut the rest into contiguous partitions, sample floor(0.1 N)
/// from each, and shuffle the remainder into train/val.
DifficultySplit degree_split(const GraphBundle& g, const SplitConfig& cfg);

double mean_degree(const GraphBundle& g, std::span<const NodeId> nodes);

enum class Scenario { Modification, Injection };
std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view text);

struct AttackBudget {
  Scenario scenario = Scenario::Injection;
  double edge_ratio = 0.05;               // modification: max edits = floor(ratio * |E|)
  std::size_t max_injected_nodes = 1;     // injection
  std::size_t max_edges_per_injected = 1; // injection
  double feature_min = -1.0;
  double feature_max = 1.0;

  /// Throws InvalidBudget if the invariants do not hold.
  void validate() const;
  std::size_t max_edits(std::size_t num_edges) const;
};

/// Per-dataset attack settings for the injection scenario.
struct DatasetPreset {
  std::string dataset;
  std::array<std::size_t, 4> injected_nodes{};  // E, M, H, F
  std::size_t edges_per_node = 0;
  double feature_min = 0.0;
  double feature_max = 0.0;
  double step_size = 0.01;
  std::size_t iterations = 0;
};

/// Adversarial-training settings (FGSM injection during training).
struct AtPreset {
  double step_size = 0.01;
  std::size_t steps_per_iter = 10;
  std::size_t injected_nodes = 0;
  std::size_t edges_per_node = 0;
  double feature_min = 0.0;
  double feature_max = 0.0;
};

DatasetPreset dataset_preset(std::string_view dataset);
AtPreset at_preset(std::string_view dataset);

/// Budget for one (dataset, scenario, difficulty). Modification budgets use
/// edge_ratio; both scenarios carry the dataset's feature range.
AttackBudget budget_preset(std::string_view dataset, Scenario scenario, Difficulty difficulty = Difficulty::Full,
                           double edge_ratio = 0.05);

/// Per-field budget overrides layered over a preset. A max_injected_nodes
/// override applies to every difficulty.
struct BudgetOverride {
  std::optional<std::size_t> max_injected_nodes;
  std::optional<std::size_t> max_edges_per_injected;
  std::optional<double> feature_min;
  std::optional<double> feature_max;

  AttackBudget apply(AttackBudget b) const;
};

/// budget_preset plus overrides. An empty preset name means the overrides
/// must define every field (node and edge caps for injection, and the
/// feature range).
AttackBudget resolve_budget(std::string_view preset, Scenario scenario, Difficulty difficulty, double edge_ratio,
                            const BudgetOverride& overrides);

std::string split_to_json(const DifficultySplit& split);
DifficultySplit split_from_json(const std::string& text);
void save_split(const DifficultySplit& split, const std::filesystem::path& path);
DifficultySplit load_split(const std::filesystem::path& path);

}  // namespace grb
