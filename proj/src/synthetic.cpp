#include "grb/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "grb/error.hpp"
#include "grb/rng.hpp"

namespace grb {

namespace {

// Inverse-CDF sampler over nonnegative weights.
class WeightedPicker {
 public:
  void add(NodeId id, double w) {
    ids_.push_back(id);
    total_ += w;
    cumulative_.push_back(total_);
  }
  bool empty() const { return ids_.empty(); }
  NodeId pick(Rng& rng) const {
    const double x = rng.uniform() * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    if (it == cumulative_.end()) --it;
    return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<NodeId> ids_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

}  // namespace

std::vector<std::string> synthetic_dataset_names() { return {"toy", "synth-cora", "powerlaw-1000", "powerlaw-3000"}; }

bool is_synthetic_dataset(std::string_view name) {
  for (const auto& n : synthetic_dataset_names()) {
    if (n == name) return true;
  }
  return false;
}

SyntheticConfig synthetic_preset(std::string_view name) {
  SyntheticConfig c;
  c.name = std::string(name);
  if (name == "toy") {
    c.num_nodes = 600;
    c.num_edges = 1150;
    c.num_features = 64;
    c.num_classes = 4;
  } else if (name == "synth-cora") {
    // Same size as grb-cora.
    c.num_nodes = 2680;
    c.num_edges = 5148;
    c.num_features = 302;
    c.num_classes = 7;
    c.words_per_topic = 20;
    c.signal = 0.3;
  } else if (name == "powerlaw-1000") {
    c.num_nodes = 1000;
    c.num_edges = 2000;
    c.num_features = 64;
    c.num_classes = 5;
  } else if (name == "powerlaw-3000") {
    c.num_nodes = 3000;
    c.num_edges = 6000;
    c.num_features = 64;
    c.num_classes = 5;
  } else {
    throw Error(ErrorCode::UnknownDataset, "no synthetic dataset named '" + std::string(name) + "'");
  }
  return c;
}

GraphBundle generate_synthetic(const SyntheticConfig& cfg) {
  const std::size_t n = cfg.num_nodes;
  const std::uint32_t classes = cfg.num_classes;
  if (n < 2 || classes < 2 || cfg.num_features < 1) {
    throw Error(ErrorCode::InvalidArgument, "synthetic graph needs >= 2 nodes, >= 2 classes, >= 1 feature");
  }
  if (cfg.num_edges > n * (n - 1) / 4) throw Error(ErrorCode::InvalidArgument, "too many edges requested");
  Rng rng(cfg.seed);

  std::vector<std::uint32_t> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<std::uint32_t>(rng.uniform_index(classes));
  std::vector<double> theta(n);
  for (double& t : theta) t = std::min(cfg.max_propensity, std::pow(1.0 - rng.uniform(), -1.0 / cfg.pareto_alpha));

  WeightedPicker all;
  std::vector<WeightedPicker> within(classes), outside(classes);
  for (NodeId v = 0; v < n; ++v) {
    all.add(v, theta[v]);
    for (std::uint32_t c = 0; c < classes; ++c) (labels[v] == c ? within[c] : outside[c]).add(v, theta[v]);
  }

  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> seen;
  std::size_t attempts = 0;
  while (edges.size() < cfg.num_edges && attempts++ < 100 * cfg.num_edges) {
    const NodeId u = all.pick(rng);
    const std::uint32_t c = labels[u];
    const bool same = rng.bernoulli(cfg.homophily);
    const WeightedPicker& pool = same ? within[c] : outside[c];
    if (pool.empty()) continue;
    const NodeId v = pool.pick(rng);
    if (u == v) continue;
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
    if (!seen.insert(key).second) continue;
    edges.push_back({std::min(u, v), std::max(u, v)});
  }

  const std::size_t d = cfg.num_features;
  std::vector<std::vector<std::uint32_t>> topics(classes);
  std::vector<std::uint32_t> columns(d);
  for (std::size_t i = 0; i < d; ++i) columns[i] = static_cast<std::uint32_t>(i);
  for (auto& t : topics) t = rng.sample(columns, std::min(cfg.words_per_topic, d));
  FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.normal());
  for (NodeId v = 0; v < n; ++v) {
    for (std::uint32_t c : topics[labels[v]]) x(v, c) += static_cast<float>(cfg.signal);
  }
  return GraphBundle(cfg.name, n, edges, std::move(x), std::move(labels), classes);
}

}  // namespace grb
