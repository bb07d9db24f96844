#include "grb/data_prep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "grb/bundle_io.hpp"
#include "grb/error.hpp"
#include "grb/rng.hpp"

namespace grb {

using nlohmann::json;

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "E";
    case Difficulty::Medium: return "M";
    case Difficulty::Hard: return "H";
    case Difficulty::Full: return "F";
  }
  return "?";
}

Difficulty parse_difficulty(std::string_view text) {
  if (text == "E" || text == "easy") return Difficulty::Easy;
  if (text == "M" || text == "medium") return Difficulty::Medium;
  if (text == "H" || text == "hard") return Difficulty::Hard;
  if (text == "F" || text == "full") return Difficulty::Full;
  throw Error(ErrorCode::InvalidArgument, "unknown difficulty '" + std::string(text) + "'");
}

std::string_view to_string(Scenario s) {
  return s == Scenario::Injection ? "injection" : "modification";
}

Scenario parse_scenario(std::string_view text) {
  if (text == "injection") return Scenario::Injection;
  if (text == "modification") return Scenario::Modification;
  throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + std::string(text) + "'");
}

namespace {

std::vector<NodeId> sorted_union(std::initializer_list<const std::vector<NodeId>*> parts) {
  std::vector<NodeId> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<NodeId> DifficultySplit::test_full() const {
  return sorted_union({&test_easy, &test_medium, &test_hard});
}

std::vector<NodeId> DifficultySplit::test(Difficulty d) const {
  switch (d) {
    case Difficulty::Easy: return test_easy;
    case Difficulty::Medium: return test_medium;
    case Difficulty::Hard: return test_hard;
    case Difficulty::Full: return test_full();
  }
  return {};
}

std::vector<NodeId> DifficultySplit::train_val() const { return sorted_union({&train, &val}); }

FeatureMatrix standardize_arctan(const FeatureMatrix& features, bool per_column) {
  const Eigen::Index rows = features.rows();
  const Eigen::Index cols = features.cols();
  if (features.size() == 0) throw Error(ErrorCode::ZeroVariance, "empty feature matrix");
  const Eigen::MatrixXd x = features.cast<double>();
  Eigen::VectorXd mean(cols), stdev(cols);
  if (per_column) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mean(c) = x.col(c).mean();
      stdev(c) = std::sqrt((x.col(c).array() - mean(c)).square().mean());
      if (!(stdev(c) > 0.0)) {
        throw Error(ErrorCode::ZeroVariance, "feature column " + std::to_string(c) + " is constant");
      }
    }
  } else {
    const double m = x.mean();
    const double s = std::sqrt((x.array() - m).square().mean());
    if (!(s > 0.0)) throw Error(ErrorCode::ZeroVariance, "feature matrix is constant");
    mean.setConstant(m);
    stdev.setConstant(s);
  }

  // Largest float below 1: arctan saturates and would otherwise round to +-1.
  const float bound = std::nextafter(1.0f, 0.0f);
  FeatureMatrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double z = (x(r, c) - mean(c)) / stdev(c);
      const float v = static_cast<float>(2.0 / std::numbers::pi * std::atan(z));
      out(r, c) = std::clamp(v, -bound, bound);
    }
  }
  return out;
}

double mean_degree(const GraphBundle& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  double total = 0.0;
  for (NodeId v : nodes) total += static_cast<double>(g.degree(v));
  return total / static_cast<double>(nodes.size());
}

DifficultySplit degree_split(const GraphBundle& g, const SplitConfig& cfg) {
  const std::size_t n = g.num_nodes();
  if (n < 100) throw Error(ErrorCode::TooSmall, "degree_split needs at least 100 nodes, got " + std::to_string(n));
  if (cfg.partition_count != 3) {
    throw Error(ErrorCode::InvalidArgument, "difficulty split uses exactly 3 partitions (E/M/H)");
  }
  const double total_fraction =
      cfg.train_fraction + cfg.val_fraction + cfg.sample_fraction * cfg.partition_count;
  if (cfg.trim_fraction < 0.0 || cfg.trim_fraction >= 0.5 || cfg.sample_fraction <= 0.0 ||
      cfg.train_fraction <= 0.0 || cfg.val_fraction < 0.0 || total_fraction > 1.0 + 1e-9) {
    throw Error(ErrorCode::FractionOverflow, "split fractions are inconsistent (sum " +
                                                 std::to_string(total_fraction) + ")");
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (g.degree(a) != g.degree(b)) return g.degree(a) < g.degree(b);
    return a < b;
  });

  const auto trim = static_cast<std::size_t>(std::floor(cfg.trim_fraction * static_cast<double>(n)));
  const std::size_t middle = n - 2 * trim;
  const auto per_partition = static_cast<std::size_t>(std::floor(cfg.sample_fraction * static_cast<double>(n)));

  Rng rng(cfg.seed);
  std::vector<bool> is_test(n, false);
  std::array<std::vector<NodeId>, 3> tests;
  for (std::size_t p = 0; p < 3; ++p) {
    const std::size_t begin = trim + p * middle / 3;
    const std::size_t end = trim + (p + 1) * middle / 3;
    if (per_partition > end - begin) {
      throw Error(ErrorCode::FractionOverflow, "partition of " + std::to_string(end - begin) +
                                                   " nodes cannot supply " + std::to_string(per_partition));
    }
    std::span<const NodeId> partition(order.data() + begin, end - begin);
    tests[p] = rng.sample(partition, per_partition);
    for (NodeId v : tests[p]) is_test[v] = true;
    std::sort(tests[p].begin(), tests[p].end());
  }

  std::vector<NodeId> pool;
  pool.reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    if (!is_test[v]) pool.push_back(v);
  }
  rng.shuffle(pool);
  const double train_share = cfg.train_fraction / (cfg.train_fraction + cfg.val_fraction);
  const auto train_count = static_cast<std::size_t>(std::llround(train_share * static_cast<double>(pool.size())));

  DifficultySplit split;
  split.seed = cfg.seed;
  split.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(train_count));
  split.val.assign(pool.begin() + static_cast<std::ptrdiff_t>(train_count), pool.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  split.test_easy = std::move(tests[0]);
  split.test_medium = std::move(tests[1]);
  split.test_hard = std::move(tests[2]);
  return split;
}

void AttackBudget::validate() const {
  if (scenario == Scenario::Modification && !(edge_ratio > 0.0 && edge_ratio <= 1.0)) {
    throw Error(ErrorCode::InvalidBudget, "edge ratio must be in (0, 1]");
  }
  if (scenario == Scenario::Injection && (max_injected_nodes < 1 || max_edges_per_injected < 1)) {
    throw Error(ErrorCode::InvalidBudget, "injection budget needs at least one node and one edge");
  }
  if (!(feature_min < feature_max)) throw Error(ErrorCode::InvalidBudget, "feature range is empty");
}

std::size_t AttackBudget::max_edits(std::size_t num_edges) const {
  return static_cast<std::size_t>(std::floor(edge_ratio * static_cast<double>(num_edges) + 1e-9));
}

namespace {

// Injection presets per dataset (nodes E/M/H/F, edges per node, feature range,
// step size, iterations) and the matching adversarial-training presets.
const std::map<std::string, DatasetPreset, std::less<>>& preset_table() {
  static const std::map<std::string, DatasetPreset, std::less<>> table = {
      {"grb-cora", {"grb-cora", {20, 20, 20, 60}, 20, -0.94, 0.94, 0.01, 1000}},
      {"grb-citeseer", {"grb-citeseer", {30, 30, 30, 90}, 20, -0.96, 0.89, 0.01, 1000}},
      {"grb-flickr", {"grb-flickr", {200, 200, 200, 600}, 100, -0.47, 0.99, 0.01, 2000}},
      {"grb-reddit", {"grb-reddit", {500, 500, 500, 1500}, 200, -0.98, 0.99, 0.01, 2000}},
      {"grb-aminer", {"grb-aminer", {500, 500, 500, 1500}, 100, -0.93, 0.93, 0.01, 5000}},
      // Synthetic stand-ins: cora-sized graph reuses the grb-cora settings;
      // the small toy graph scales the node count down.
      {"synth-cora", {"synth-cora", {20, 20, 20, 60}, 20, -0.94, 0.94, 0.01, 1000}},
      {"toy", {"toy", {6, 6, 6, 18}, 8, -0.94, 0.94, 0.01, 200}},
      {"powerlaw-1000", {"powerlaw-1000", {10, 10, 10, 30}, 10, -0.94, 0.94, 0.01, 500}},
      {"powerlaw-3000", {"powerlaw-3000", {20, 20, 20, 60}, 20, -0.94, 0.94, 0.01, 1000}},
  };
  return table;
}

const std::map<std::string, AtPreset, std::less<>>& at_table() {
  static const std::map<std::string, AtPreset, std::less<>> table = {
      {"grb-cora", {0.01, 10, 20, 20, -0.94, 0.94}},
      {"grb-citeseer", {0.01, 10, 30, 20, -0.96, 0.89}},
      {"grb-flickr", {0.01, 10, 200, 100, -0.47, 0.99}},
      {"grb-reddit", {0.01, 10, 500, 200, -0.98, 0.99}},
      {"grb-aminer", {0.01, 10, 500, 100, -0.93, 0.93}},
      {"synth-cora", {0.01, 10, 20, 20, -0.94, 0.94}},
      {"toy", {0.01, 10, 6, 8, -0.94, 0.94}},
      {"powerlaw-1000", {0.01, 10, 10, 10, -0.94, 0.94}},
      {"powerlaw-3000", {0.01, 10, 20, 20, -0.94, 0.94}},
  };
  return table;
}

}  // namespace

DatasetPreset dataset_preset(std::string_view dataset) {
  const auto& table = preset_table();
  auto it = table.find(dataset);
  if (it == table.end()) throw Error(ErrorCode::UnknownDataset, "no attack preset for '" + std::string(dataset) + "'");
  return it->second;
}

AtPreset at_preset(std::string_view dataset) {
  const auto& table = at_table();
  auto it = table.find(dataset);
  if (it == table.end()) throw Error(ErrorCode::UnknownDataset, "no AT preset for '" + std::string(dataset) + "'");
  return it->second;
}

AttackBudget budget_preset(std::string_view dataset, Scenario scenario, Difficulty difficulty, double edge_ratio) {
  const DatasetPreset p = dataset_preset(dataset);
  AttackBudget b;
  b.scenario = scenario;
  b.edge_ratio = edge_ratio;
  b.feature_min = p.feature_min;
  b.feature_max = p.feature_max;
  b.max_injected_nodes = p.injected_nodes[static_cast<std::size_t>(difficulty)];
  b.max_edges_per_injected = p.edges_per_node;
  b.validate();
  return b;
}

AttackBudget BudgetOverride::apply(AttackBudget b) const {
  if (max_injected_nodes) b.max_injected_nodes = *max_injected_nodes;
  if (max_edges_per_injected) b.max_edges_per_injected = *max_edges_per_injected;
  if (feature_min) b.feature_min = *feature_min;
  if (feature_max) b.feature_max = *feature_max;
  b.validate();
  return b;
}

AttackBudget resolve_budget(std::string_view preset, Scenario scenario, Difficulty difficulty, double edge_ratio,
                            const BudgetOverride& overrides) {
  if (!preset.empty()) return overrides.apply(budget_preset(preset, scenario, difficulty, edge_ratio));
  const bool injection = scenario == Scenario::Injection;
  if (!overrides.feature_min || !overrides.feature_max ||
      (injection && (!overrides.max_injected_nodes || !overrides.max_edges_per_injected))) {
    throw Error(ErrorCode::InvalidBudget, "no dataset preset; budget overrides must be complete");
  }
  AttackBudget b;
  b.scenario = scenario;
  b.edge_ratio = edge_ratio;
  return overrides.apply(b);
}

std::string split_to_json(const DifficultySplit& split) {
  json j = {{"train", split.train},
            {"val", split.val},
            {"test_easy", split.test_easy},
            {"test_medium", split.test_medium},
            {"test_hard", split.test_hard},
            {"seed", split.seed}};
  return j.dump() + "\n";
}

DifficultySplit split_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    DifficultySplit s;
    s.train = j.at("train").get<std::vector<NodeId>>();
    s.val = j.at("val").get<std::vector<NodeId>>();
    s.test_easy = j.at("test_easy").get<std::vector<NodeId>>();
    s.test_medium = j.at("test_medium").get<std::vector<NodeId>>();
    s.test_hard = j.at("test_hard").get<std::vector<NodeId>>();
    s.seed = j.value("seed", std::uint64_t{0});
    for (auto* set : {&s.train, &s.val, &s.test_easy, &s.test_medium, &s.test_hard}) {
      std::sort(set->begin(), set->end());
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "splits.json: " + std::string(e.what()));
  }
}

void save_split(const DifficultySplit& split, const std::filesystem::path& path) {
  io::write_text_file(path, split_to_json(split));
}

DifficultySplit load_split(const std::filesystem::path& path) {
  return split_from_json(io::read_text_file(path));
}

}  // namespace grb
