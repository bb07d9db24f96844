#include "grb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_set>

#include "grb/error.hpp"

namespace grb {

namespace {

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

void build_csr(std::size_t n, std::span<const Edge> edges, std::vector<std::size_t>& row_ptr,
               std::vector<NodeId>& col_idx) {
  std::vector<std::vector<NodeId>> rows(n);
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorCode::InvalidNode, "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                              ") outside [0," + std::to_string(n) + ")");
    }
    if (e.u == e.v) continue;
    rows[e.u].push_back(e.v);
    rows[e.v].push_back(e.u);
  }
  row_ptr.assign(n + 1, 0);
  col_idx.clear();
  for (std::size_t v = 0; v < n; ++v) {
    auto& r = rows[v];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    col_idx.insert(col_idx.end(), r.begin(), r.end());
    row_ptr[v + 1] = col_idx.size();
  }
}

}  // namespace

GraphBundle::GraphBundle(std::string name, std::size_t num_nodes, std::span<const Edge> edges,
                         FeatureMatrix features, std::vector<std::uint32_t> labels,
                         std::uint32_t num_classes, bool allow_sentinel)
    : name_(std::move(name)),
      num_nodes_(num_nodes),
      features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  build_csr(num_nodes_, edges, row_ptr_, col_idx_);
  validate_attributes(allow_sentinel);
}

void GraphBundle::validate_attributes(bool allow_sentinel) const {
  if (static_cast<std::size_t>(features_.rows()) != num_nodes_) {
    throw Error(ErrorCode::ShapeMismatch, "feature rows " + std::to_string(features_.rows()) +
                                              " != num_nodes " + std::to_string(num_nodes_));
  }
  if (labels_.size() != num_nodes_) {
    throw Error(ErrorCode::ShapeMismatch, "labels length " + std::to_string(labels_.size()) +
                                              " != num_nodes " + std::to_string(num_nodes_));
  }
  const std::uint32_t limit = allow_sentinel ? num_classes_ + 1 : num_classes_;
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    if (labels_[v] >= limit) {
      throw Error(ErrorCode::LabelOutOfRange, "node " + std::to_string(v) + " has label " +
                                                  std::to_string(labels_[v]) + " with " +
                                                  std::to_string(num_classes_) + " classes");
    }
  }
}

bool GraphBundle::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes_ || v >= num_nodes_) return false;
  auto row = neighbors(u);
  return std::binary_search(row.begin(), row.end(), v);
}

std::vector<Edge> GraphBundle::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes_; ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

CsrMatrix GraphBundle::adjacency_matrix() const {
  CsrMatrix m;
  m.rows = m.cols = num_nodes_;
  m.row_ptr = row_ptr_;
  m.col_idx = col_idx_;
  m.values.assign(col_idx_.size(), 1.0);
  return m;
}

GraphBundle GraphBundle::with_features(FeatureMatrix features) const {
  GraphBundle g = *this;
  g.features_ = std::move(features);
  g.validate_attributes(true);
  return g;
}

GraphBundle GraphBundle::with_labels(std::vector<std::uint32_t> labels) const {
  GraphBundle g = *this;
  g.labels_ = std::move(labels);
  g.validate_attributes(true);
  return g;
}

GraphBundle GraphBundle::with_name(std::string name) const {
  GraphBundle g = *this;
  g.name_ = std::move(name);
  return g;
}

bool operator==(const GraphBundle& a, const GraphBundle& b) {
  if (a.name_ != b.name_ || a.num_nodes_ != b.num_nodes_ || a.num_classes_ != b.num_classes_ ||
      a.row_ptr_ != b.row_ptr_ || a.col_idx_ != b.col_idx_ || a.labels_ != b.labels_) {
    return false;
  }
  if (a.features_.rows() != b.features_.rows() || a.features_.cols() != b.features_.cols()) {
    return false;
  }
  // Bitwise comparison so that NaN payloads and signed zeros count.
  return std::memcmp(a.features_.data(), b.features_.data(),
                     sizeof(float) * static_cast<std::size_t>(a.features_.size())) == 0;
}

std::vector<std::size_t> degrees(const GraphBundle& g) {
  std::vector<std::size_t> d(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) d[v] = g.degree(v);
  return d;
}

GraphBundle apply_edits(const GraphBundle& g, std::span<const EdgeEdit> edits) {
  const std::size_t n = g.num_nodes();
  std::unordered_set<std::uint64_t> present;
  present.reserve(g.num_edges() * 2 + edits.size());
  for (const Edge& e : g.edge_list()) present.insert(edge_key(e.u, e.v));

  for (const EdgeEdit& e : edits) {
    const std::string where = "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
    if (e.u >= n || e.v >= n) throw Error(ErrorCode::InvalidNode, "edit " + where + " outside graph");
    if (e.u == e.v) throw Error(ErrorCode::SelfLoopForbidden, "edit " + where);
    const auto key = edge_key(e.u, e.v);
    if (e.kind == EditKind::Add) {
      if (!present.insert(key).second) throw Error(ErrorCode::DuplicateAdd, "edge " + where + " already present");
    } else {
      if (present.erase(key) == 0) throw Error(ErrorCode::MissingRemove, "edge " + where + " not present");
    }
  }

  std::vector<Edge> edges;
  edges.reserve(present.size());
  for (std::uint64_t key : present) {
    edges.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu)});
  }
  return GraphBundle(g.name(), n, edges, g.features(), g.labels(), g.num_classes(), true);
}

GraphBundle apply_injection(const GraphBundle& g, const InjectionPatch& patch) {
  const std::size_t n = g.num_nodes();
  const std::size_t m = patch.num_injected;
  if (m == 0) return g;
  if (static_cast<std::size_t>(patch.features.rows()) != m ||
      static_cast<std::size_t>(patch.features.cols()) != g.num_features()) {
    throw Error(ErrorCode::ShapeMismatch, "injected features must be " + std::to_string(m) + "x" +
                                              std::to_string(g.num_features()));
  }

  std::vector<Edge> edges = g.edge_list();
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::size_t> inj_degree(m, 0);
  auto add = [&](NodeId a, NodeId b) {
    if (a == b) throw Error(ErrorCode::SelfLoopForbidden, "injected node " + std::to_string(a - n));
    if (!seen.insert(edge_key(a, b)).second) {
      throw Error(ErrorCode::DuplicateAdd, "duplicate injected edge (" + std::to_string(a) + "," +
                                               std::to_string(b) + ")");
    }
    edges.push_back({a, b});
  };
  for (const auto& [i, t] : patch.target_edges) {
    if (i >= m) throw Error(ErrorCode::InvalidTarget, "injected index " + std::to_string(i) + " out of range");
    if (t >= n) throw Error(ErrorCode::InvalidTarget, "target " + std::to_string(t) + " not in host graph");
    add(static_cast<NodeId>(n + i), t);
    ++inj_degree[i];
  }
  for (const auto& [i, j] : patch.internal_edges) {
    if (i >= m || j >= m) throw Error(ErrorCode::InvalidTarget, "internal injected edge out of range");
    add(static_cast<NodeId>(n + i), static_cast<NodeId>(n + j));
    ++inj_degree[i];
    ++inj_degree[j];
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (inj_degree[i] == 0) {
      throw Error(ErrorCode::EmptyNeighborhood, "injected node " + std::to_string(i) + " has no edges");
    }
  }

  FeatureMatrix features(static_cast<Eigen::Index>(n + m), g.features().cols());
  features.topRows(static_cast<Eigen::Index>(n)) = g.features();
  features.bottomRows(static_cast<Eigen::Index>(m)) = patch.features;
  std::vector<std::uint32_t> labels = g.labels();
  labels.resize(n + m, g.label_sentinel());
  return GraphBundle(g.name(), n + m, edges, std::move(features), std::move(labels), g.num_classes(), true);
}

GraphBundle induced_subgraph(const GraphBundle& g, std::span<const NodeId> nodes) {
  constexpr NodeId kAbsent = ~NodeId{0};
  std::vector<NodeId> remap(g.num_nodes(), kAbsent);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= g.num_nodes()) throw Error(ErrorCode::InvalidNode, "subgraph node out of range");
    remap[nodes[i]] = static_cast<NodeId>(i);
  }
  std::vector<Edge> edges;
  FeatureMatrix features(static_cast<Eigen::Index>(nodes.size()), g.features().cols());
  std::vector<std::uint32_t> labels(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeId v = nodes[i];
    features.row(static_cast<Eigen::Index>(i)) = g.features().row(v);
    labels[i] = g.labels()[v];
    for (NodeId w : g.neighbors(v)) {
      if (remap[w] != kAbsent && remap[w] > i) edges.push_back({static_cast<NodeId>(i), remap[w]});
    }
  }
  return GraphBundle(g.name(), nodes.size(), edges, std::move(features), std::move(labels), g.num_classes(), true);
}

GraphBundle permute_nodes(const GraphBundle& g, std::span<const NodeId> perm) {
  const std::size_t n = g.num_nodes();
  if (perm.size() != n) throw Error(ErrorCode::ShapeMismatch, "permutation length");
  std::vector<Edge> edges;
  for (const Edge& e : g.edge_list()) edges.push_back({perm[e.u], perm[e.v]});
  FeatureMatrix features(g.features().rows(), g.features().cols());
  std::vector<std::uint32_t> labels(n);
  for (std::size_t v = 0; v < n; ++v) {
    features.row(perm[v]) = g.features().row(static_cast<Eigen::Index>(v));
    labels[perm[v]] = g.labels()[v];
  }
  return GraphBundle(g.name(), n, edges, std::move(features), std::move(labels), g.num_classes(), true);
}

}  // namespace grb
