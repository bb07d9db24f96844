#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "grb/bundle_io.hpp"
#include "grb/error.hpp"
#include "grb/graph.hpp"
#include "support.hpp"

using namespace grb;
using grb::testing::make_graph;
using grb::testing::path3;

namespace {

std::vector<std::size_t> degs(const GraphBundle& g) { return degrees(g); }

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

bool symmetric(const GraphBundle& g) {
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (!g.has_edge(v, u) || u == v) return false;
    }
  }
  return true;
}

void write_raw_bundle(const std::filesystem::path& dir, std::size_t n, const std::vector<std::uint32_t>& arcs,
                      const std::vector<float>& features, std::size_t d, const std::vector<std::uint32_t>& labels,
                      std::size_t num_edges, const std::string& storage = "directed") {
  std::filesystem::create_directories(dir);
  nlohmann::json meta{{"name", "raw"},           {"num_nodes", n},   {"num_edges", num_edges},
                      {"num_features", d},       {"num_classes", 2}, {"edge_storage", storage}};
  io::write_text_file(dir / "meta.json", meta.dump());
  io::write_u32_file(dir / "edges.bin", arcs);
  io::write_f32_file(dir / "features.bin", features);
  io::write_u32_file(dir / "labels.bin", labels);
}

}  // namespace

TEST(Bundle, EmptyEdgeFileGivesIsolatedNodes) {
  const auto dir = grb::testing::temp_dir("empty-edges");
  write_raw_bundle(dir, 3, {}, std::vector<float>(3, 0.f), 1, {0, 1, 0}, 0);
  const GraphBundle g = load_bundle(dir);
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(degs(g), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Bundle, DuplicateArcsAndSelfLoopsCanonicalized) {
  const auto dir = grb::testing::temp_dir("dedup");
  write_raw_bundle(dir, 2, {0, 1, 1, 0, 1, 1}, std::vector<float>(2, 0.f), 1, {0, 1}, 3);
  const GraphBundle g = load_bundle(dir);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(1, 1));
}

TEST(Bundle, Errors) {
  expect_code(ErrorCode::MissingFile, [] { load_bundle(grb::testing::temp_dir("missing")); });
  const auto dir = grb::testing::temp_dir("shape");
  write_raw_bundle(dir, 3, {0, 1}, std::vector<float>(5, 0.f), 2, {0, 1, 0}, 1);
  expect_code(ErrorCode::ShapeMismatch, [&] { load_bundle(dir); });
  const auto dir2 = grb::testing::temp_dir("label");
  write_raw_bundle(dir2, 2, {0, 1}, std::vector<float>(2, 0.f), 1, {0, 2}, 1);
  expect_code(ErrorCode::LabelOutOfRange, [&] { load_bundle(dir2); });
  const auto dir3 = grb::testing::temp_dir("count");
  write_raw_bundle(dir3, 2, {0, 1}, std::vector<float>(2, 0.f), 1, {0, 1}, 4);
  expect_code(ErrorCode::ShapeMismatch, [&] { load_bundle(dir3); });
}

TEST(Bundle, RoundTripIsBitExact) {
  const GraphBundle g = grb::testing::random_graph(60, 0.1, 3);
  const auto dir = grb::testing::temp_dir("roundtrip");
  save_bundle(g, dir);
  const GraphBundle back = load_bundle(dir);
  EXPECT_TRUE(back == g);
  EXPECT_EQ(std::memcmp(back.features().data(), g.features().data(), sizeof(float) * g.features().size()), 0);
}

TEST(Bundle, RoundTripWithoutEdges) {
  const GraphBundle g = make_graph(4, {});
  const auto dir = grb::testing::temp_dir("noedges");
  save_bundle(g, dir);
  EXPECT_EQ(load_bundle(dir).num_edges(), 0u);
}

TEST(Bundle, UnwritablePathIsIoFailure) {
  expect_code(ErrorCode::IoFailure, [] { save_bundle(path3(), "/dev/null/bundle"); });
}

TEST(Degrees, PathAndIsolated) {
  EXPECT_EQ(degs(path3()), (std::vector<std::size_t>{1, 2, 1}));
  EXPECT_EQ(degs(make_graph(1, {})), (std::vector<std::size_t>{0}));
}

TEST(Graph, ConstructorCanonicalizes) {
  const GraphBundle g = make_graph(2, {{0, 1}, {1, 0}, {1, 1}});
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(symmetric(g));
}

TEST(ApplyEdits, RemoveFromPath) {
  const std::vector<EdgeEdit> edits{{EditKind::Remove, 0, 1}};
  EXPECT_EQ(degs(apply_edits(path3(), edits)), (std::vector<std::size_t>{0, 1, 1}));
}

TEST(ApplyEdits, AddThenRemoveIsIdentity) {
  const GraphBundle g = path3();
  const std::vector<EdgeEdit> edits{{EditKind::Add, 0, 2}, {EditKind::Remove, 2, 0}};
  EXPECT_TRUE(apply_edits(g, edits) == g);
}

TEST(ApplyEdits, Rejections) {
  const GraphBundle g = path3();
  expect_code(ErrorCode::DuplicateAdd, [&] { apply_edits(g, std::vector<EdgeEdit>{{EditKind::Add, 0, 1}}); });
  expect_code(ErrorCode::MissingRemove, [&] { apply_edits(g, std::vector<EdgeEdit>{{EditKind::Remove, 0, 2}}); });
  expect_code(ErrorCode::SelfLoopForbidden, [&] { apply_edits(g, std::vector<EdgeEdit>{{EditKind::Add, 1, 1}}); });
  expect_code(ErrorCode::InvalidNode, [&] { apply_edits(g, std::vector<EdgeEdit>{{EditKind::Add, 0, 7}}); });
}

TEST(ApplyEdits, RandomFlipsKeepCountBookkeeping) {
  const GraphBundle g = grb::testing::random_graph(50, 0.1, 11);
  Rng rng(5);
  std::vector<EdgeEdit> edits;
  std::set<std::pair<NodeId, NodeId>> touched;
  long adds = 0, removes = 0;
  while (edits.size() < 100) {
    NodeId u = static_cast<NodeId>(rng.uniform_index(50)), v = static_cast<NodeId>(rng.uniform_index(50));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!touched.insert({u, v}).second) continue;
    const bool present = g.has_edge(u, v);
    edits.push_back({present ? EditKind::Remove : EditKind::Add, u, v});
    (present ? removes : adds) += 1;
  }
  const GraphBundle h = apply_edits(g, edits);
  EXPECT_EQ(static_cast<long>(h.num_edges()), static_cast<long>(g.num_edges()) + adds - removes);
  EXPECT_TRUE(symmetric(h));
  EXPECT_EQ(g.num_edges(), grb::testing::random_graph(50, 0.1, 11).num_edges());  // original untouched
}

TEST(ApplyInjection, OneNodeOnPath) {
  InjectionPatch p;
  p.num_injected = 1;
  p.features = grb::testing::zeros(1, 2);
  p.target_edges = {{0, 0}};
  const GraphBundle h = apply_injection(path3(), p);
  EXPECT_EQ(degs(h), (std::vector<std::size_t>{2, 2, 1, 1}));
  EXPECT_EQ(h.labels()[3], h.label_sentinel());
}

TEST(ApplyInjection, ZeroNodesIsIdentity) {
  InjectionPatch p;
  p.features = grb::testing::zeros(0, 2);
  EXPECT_TRUE(apply_injection(path3(), p) == path3());
}

TEST(ApplyInjection, Errors) {
  InjectionPatch p;
  p.num_injected = 2;
  p.features = grb::testing::zeros(2, 2);
  p.target_edges = {{0, 1}};
  expect_code(ErrorCode::EmptyNeighborhood, [&] { apply_injection(path3(), p); });
  p.target_edges = {{0, 1}, {1, 9}};
  expect_code(ErrorCode::InvalidTarget, [&] { apply_injection(path3(), p); });
}

TEST(ApplyInjection, PresetSizedInjectionRecount) {
  // 20 nodes x 20 edges on a host with distinct targets per node.
  const GraphBundle g = grb::testing::random_graph(400, 0.02, 4, 3);
  InjectionPatch p;
  p.num_injected = 20;
  p.features = grb::testing::zeros(20, 3);
  for (std::uint32_t i = 0; i < 20; ++i) {
    for (NodeId k = 0; k < 20; ++k) p.target_edges.push_back({i, static_cast<NodeId>((i * 20 + k) % 400)});
  }
  const GraphBundle h = apply_injection(g, p);
  EXPECT_EQ(h.num_nodes(), 420u);
  EXPECT_EQ(h.num_edges(), g.num_edges() + 400);
  std::size_t recount = 0;
  for (NodeId v = 0; v < h.num_nodes(); ++v) recount += h.degree(v);
  EXPECT_EQ(recount, 2 * h.num_edges());
  EXPECT_TRUE(symmetric(h));
  // Original rows are a verbatim prefix, original features unchanged.
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto a = g.neighbors(v);
    const auto b = h.neighbors(v);
    ASSERT_GE(b.size(), a.size());
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  EXPECT_EQ(std::memcmp(h.features().data(), g.features().data(), sizeof(float) * g.features().size()), 0);
}

TEST(Graph, InducedSubgraphAndPermutation) {
  const GraphBundle g = grb::testing::random_graph(30, 0.2, 8);
  std::vector<NodeId> perm(30);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  Rng rng(1);
  rng.shuffle(perm);
  const GraphBundle p = permute_nodes(g, perm);
  EXPECT_EQ(p.num_edges(), g.num_edges());
  const std::vector<NodeId> keep{3, 7, 9, 20};
  const GraphBundle s = induced_subgraph(g, keep);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if (i != j) {
        EXPECT_EQ(s.has_edge(static_cast<NodeId>(i), static_cast<NodeId>(j)), g.has_edge(keep[i], keep[j]));
      }
    }
  }
}
