#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grb/bundle_io.hpp"
#include "grb/data_prep.hpp"
#include "grb/graph.hpp"
#include "grb/rng.hpp"
#include "grb/synthetic.hpp"

namespace grb::testing {

inline FeatureMatrix zeros(std::size_t n, std::size_t d) {
  return FeatureMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
}

inline GraphBundle make_graph(std::size_t n, const std::vector<Edge>& edges, std::size_t d = 2,
                              std::uint32_t classes = 2) {
  return GraphBundle("test", n, edges, zeros(n, d), std::vector<std::uint32_t>(n, 0), classes);
}

inline GraphBundle path3() { return make_graph(3, {{0, 1}, {1, 2}}); }

inline GraphBundle random_graph(std::size_t n, double p, std::uint64_t seed, std::size_t d = 4,
                                std::uint32_t classes = 3) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) edges.push_back({u, v});
    }
  }
  FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.normal());
  std::vector<std::uint32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng.uniform_index(classes));
  return GraphBundle("random", n, edges, std::move(x), std::move(labels), classes);
}

/// Two dense clusters joined by one edge; features and labels follow the
/// cluster.
inline GraphBundle two_clusters(std::size_t half, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 2 * half;
  std::vector<Edge> edges;
  for (NodeId c = 0; c < 2; ++c) {
    const NodeId base = static_cast<NodeId>(c * half);
    for (NodeId u = 0; u < half; ++u) {
      for (NodeId v = u + 1; v < half; ++v) {
        if (rng.bernoulli(0.5)) edges.push_back({base + u, base + v});
      }
    }
  }
  edges.push_back({0, static_cast<NodeId>(half)});
  FeatureMatrix x(static_cast<Eigen::Index>(n), 4);
  std::vector<std::uint32_t> labels(n);
  for (std::size_t v = 0; v < n; ++v) {
    labels[v] = v < half ? 0 : 1;
    for (Eigen::Index j = 0; j < 4; ++j) {
      x(static_cast<Eigen::Index>(v), j) = static_cast<float>(0.3 * rng.normal() + (labels[v] == j % 2 ? 1.0 : -1.0));
    }
  }
  return GraphBundle("two-clusters", n, edges, std::move(x), std::move(labels), 2);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("grb-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Prepared {
  GraphBundle graph;
  DifficultySplit split;
};

/// Normalized graph and degree split of a synthetic preset.
inline Prepared prepare_synthetic(const std::string& name, std::uint64_t seed = 0) {
  const GraphBundle raw = generate_synthetic(synthetic_preset(name));
  GraphBundle g = raw.with_features(standardize_arctan(raw.features()));
  SplitConfig sc;
  sc.seed = seed;
  DifficultySplit split = degree_split(g, sc);
  return {std::move(g), std::move(split)};
}

/// A real dataset bundle under $GRB_DATA_DIR/<name>, normalized and split.
/// Empty when the bundle is not installed.
inline std::optional<Prepared> prepare_real(const std::string& name, std::uint64_t seed = 0) {
  const char* root = std::getenv("GRB_DATA_DIR");
  if (!root || !*root) return std::nullopt;
  const auto dir = std::filesystem::path(root) / name;
  if (!std::filesystem::exists(dir / "meta.json")) return std::nullopt;
  const GraphBundle raw = load_bundle(dir);
  GraphBundle g = raw.with_features(standardize_arctan(raw.features()));
  SplitConfig sc;
  sc.seed = seed;
  DifficultySplit split = degree_split(g, sc);
  return Prepared{std::move(g), std::move(split)};
}

}  // namespace grb::testing
