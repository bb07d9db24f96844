#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grb/sparse.hpp"

namespace grb {

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected attributed graph with node labels.
///
/// Adjacency is stored in canonical CSR form: symmetric, unit weights, no
/// self-loops, sorted and duplicate-free rows. Instances are immutable; every
/// edit returns a new bundle.
class GraphBundle {
 public:
  GraphBundle() = default;

  /// Builds a bundle from an arbitrary edge list. Edges are symmetrized and
  /// deduplicated, and self-loops are dropped. Labels must be < num_classes,
  /// except that the sentinel value num_classes is accepted when
  /// allow_sentinel is set (injected nodes).
  GraphBundle(std::string name, std::size_t num_nodes, std::span<const Edge> edges,
              FeatureMatrix features, std::vector<std::uint32_t> labels, std::uint32_t num_classes,
              bool allow_sentinel = false);

  const std::string& name() const { return name_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return col_idx_.size() / 2; }
  std::size_t num_features() const { return static_cast<std::size_t>(features_.cols()); }
  std::uint32_t num_classes() const { return num_classes_; }
  /// Label carried by injected nodes; never a real class.
  std::uint32_t label_sentinel() const { return num_classes_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {col_idx_.data() + row_ptr_[v], col_idx_.data() + row_ptr_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return row_ptr_[v + 1] - row_ptr_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<NodeId>& col_idx() const { return col_idx_; }
  const FeatureMatrix& features() const { return features_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }

  /// Each undirected edge once, as (u, v) with u < v, in row order.
  std::vector<Edge> edge_list() const;
  /// Unit-weight adjacency without self-loops.
  CsrMatrix adjacency_matrix() const;

  GraphBundle with_features(FeatureMatrix features) const;
  GraphBundle with_labels(std::vector<std::uint32_t> labels) const;
  GraphBundle with_name(std::string name) const;

  friend bool operator==(const GraphBundle& a, const GraphBundle& b);

 private:
  void validate_attributes(bool allow_sentinel) const;

  std::string name_;
  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<NodeId> col_idx_;
  FeatureMatrix features_;
  std::vector<std::uint32_t> labels_;
  std::uint32_t num_classes_ = 0;
};

enum class EditKind { Add, Remove };

struct EdgeEdit {
  EditKind kind = EditKind::Add;
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const EdgeEdit&, const EdgeEdit&) = default;
};

/// New nodes appended to a host graph. Injected nodes are addressed by their
/// index in [0, num_injected); host nodes by their original id.
struct InjectionPatch {
  std::size_t num_injected = 0;
  FeatureMatrix features;  // num_injected x D
  std::vector<std::pair<std::uint32_t, NodeId>> target_edges;    // (injected, host node)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> internal_edges;  // (injected, injected)
  friend bool operator==(const InjectionPatch&, const InjectionPatch&) = default;
};

/// Number of distinct neighbors per node.
std::vector<std::size_t> degrees(const GraphBundle& g);

/// Applies edits in order. Adding an existing edge, removing a missing one, or
/// touching a self-loop is rejected.
GraphBundle apply_edits(const GraphBundle& g, std::span<const EdgeEdit> edits);

/// Appends the injected nodes (ids N .. N+n-1) with sentinel labels. Original
/// adjacency rows keep their existing prefix and original feature rows are
/// copied verbatim.
GraphBundle apply_injection(const GraphBundle& g, const InjectionPatch& patch);

/// Subgraph induced on `nodes` (relabelled 0..k-1 in the given order).
GraphBundle induced_subgraph(const GraphBundle& g, std::span<const NodeId> nodes);

/// Relabels node v as perm[v].
GraphBundle permute_nodes(const GraphBundle& g, std::span<const NodeId> perm);

}  // namespace grb
