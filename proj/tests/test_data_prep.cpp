#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <numeric>
#include <set>

#include "grb/data_prep.hpp"
#include "grb/error.hpp"
#include "grb/synthetic.hpp"
#include "support.hpp"

using namespace grb;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

GraphBundle powerlaw(std::size_t n) {
  return generate_synthetic(synthetic_preset(n == 1000 ? "powerlaw-1000" : "powerlaw-3000"));
}

}  // namespace

TEST(StandardizeArctan, MeanMapsToZeroAndUnitZToHalf) {
  // Global mean 0 and population std 1: entries are their own z-scores.
  FeatureMatrix x(2, 2);
  x << 1.f, -1.f, 1.f, -1.f;
  const FeatureMatrix y = standardize_arctan(x);
  EXPECT_NEAR(y(0, 0), 0.5, 1e-7);
  EXPECT_NEAR(y(0, 1), -0.5, 1e-7);
  FeatureMatrix m(1, 3);
  m << 0.f, 1.f, 2.f;
  EXPECT_NEAR(standardize_arctan(m)(0, 1), 0.0, 1e-7);
}

TEST(StandardizeArctan, ConstantMatrixIsZeroVariance) {
  EXPECT_EQ(code_of([] { standardize_arctan(FeatureMatrix::Constant(3, 3, 2.f)); }), ErrorCode::ZeroVariance);
}

TEST(StandardizeArctan, BoundedAndMonotoneOnRandomMatrices) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureMatrix x(30, 7);
    const double scale = std::pow(10.0, rng.uniform(-3, 4));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(scale * rng.normal());
    const FeatureMatrix y = standardize_arctan(x);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      EXPECT_GT(y.data()[i], -1.f);
      EXPECT_LT(y.data()[i], 1.f);
      for (Eigen::Index j = 0; j < 5; ++j) {
        if (x.data()[i] < x.data()[j]) EXPECT_LE(y.data()[i], y.data()[j]);
      }
    }
  }
}

TEST(DegreeSplit, PowerLawThousandSetAlgebra) {
  const GraphBundle g = powerlaw(1000);
  SplitConfig cfg;
  cfg.seed = 5;
  const DifficultySplit s = degree_split(g, cfg);
  EXPECT_EQ(s.test_easy.size(), 100u);
  EXPECT_EQ(s.test_medium.size(), 100u);
  EXPECT_EQ(s.test_hard.size(), 100u);
  EXPECT_EQ(s.test_full().size(), 300u);
  EXPECT_EQ(s.train.size(), 600u);
  EXPECT_EQ(s.val.size(), 100u);
  std::vector<NodeId> all;
  for (const auto* set : {&s.train, &s.val, &s.test_easy, &s.test_medium, &s.test_hard}) {
    EXPECT_TRUE(std::is_sorted(set->begin(), set->end()));
    all.insert(all.end(), set->begin(), set->end());
  }
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), 1000u);
  for (NodeId v = 0; v < 1000; ++v) EXPECT_EQ(all[v], v);
  EXPECT_LT(mean_degree(g, s.test_easy), mean_degree(g, s.test_medium));
  EXPECT_LT(mean_degree(g, s.test_medium), mean_degree(g, s.test_hard));
}

TEST(DegreeSplit, TestNodesComeFromTheMiddleNinetyPercent) {
  const GraphBundle g = powerlaw(1000);
  const DifficultySplit s = degree_split(g, {});
  std::vector<NodeId> order(g.num_nodes());
  std::iota(order.begin(), order.end(), NodeId{0});
  const auto deg = degrees(g);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return deg[a] != deg[b] ? deg[a] < deg[b] : a < b;
  });
  std::vector<std::size_t> rank(g.num_nodes());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  // 50 trimmed per side, partitions of 300.
  for (NodeId v : s.test_easy) EXPECT_TRUE(rank[v] >= 50 && rank[v] < 350);
  for (NodeId v : s.test_medium) EXPECT_TRUE(rank[v] >= 350 && rank[v] < 650);
  for (NodeId v : s.test_hard) EXPECT_TRUE(rank[v] >= 650 && rank[v] < 950);
}

TEST(DegreeSplit, DeterministicPerSeed) {
  const GraphBundle g = powerlaw(1000);
  SplitConfig a;
  a.seed = 1;
  SplitConfig b;
  b.seed = 2;
  EXPECT_TRUE(degree_split(g, a) == degree_split(g, a));
  const DifficultySplit sa = degree_split(g, a), sb = degree_split(g, b);
  EXPECT_NE(sa.test_easy, sb.test_easy);
}

TEST(DegreeSplit, ConstantDegreeFallsBackToIdOrder) {
  // A 120-cycle: every degree is 2.
  std::vector<Edge> edges;
  for (NodeId v = 0; v < 120; ++v) edges.push_back({v, static_cast<NodeId>((v + 1) % 120)});
  const GraphBundle g = grb::testing::make_graph(120, edges);
  const DifficultySplit s = degree_split(g, {});
  EXPECT_DOUBLE_EQ(mean_degree(g, s.test_easy), 2.0);
  EXPECT_DOUBLE_EQ(mean_degree(g, s.test_hard), 2.0);
  // Trim 6 per side, partitions of 36: easy ids in [6, 42).
  for (NodeId v : s.test_easy) EXPECT_TRUE(v >= 6 && v < 42);
  for (NodeId v : s.test_hard) EXPECT_TRUE(v >= 78 && v < 114);
}

TEST(DegreeSplit, Errors) {
  EXPECT_EQ(code_of([] { degree_split(grb::testing::random_graph(50, 0.1, 1), {}); }), ErrorCode::TooSmall);
  SplitConfig cfg;
  cfg.train_fraction = 0.9;
  EXPECT_EQ(code_of([&] { degree_split(powerlaw(1000), cfg); }), ErrorCode::FractionOverflow);
}

TEST(DegreeSplit, JsonRoundTrip) {
  const DifficultySplit s = degree_split(powerlaw(1000), {});
  EXPECT_TRUE(split_from_json(split_to_json(s)) == s);
}

TEST(BudgetPreset, TableValues) {
  const AttackBudget e = budget_preset("grb-cora", Scenario::Injection, Difficulty::Easy);
  EXPECT_EQ(e.max_injected_nodes, 20u);
  EXPECT_EQ(budget_preset("grb-cora", Scenario::Injection, Difficulty::Medium).max_injected_nodes, 20u);
  EXPECT_EQ(budget_preset("grb-cora", Scenario::Injection, Difficulty::Hard).max_injected_nodes, 20u);
  const AttackBudget f = budget_preset("grb-cora", Scenario::Injection, Difficulty::Full);
  EXPECT_EQ(f.max_injected_nodes, 60u);
  EXPECT_EQ(f.max_edges_per_injected, 20u);
  EXPECT_DOUBLE_EQ(f.feature_min, -0.94);
  EXPECT_DOUBLE_EQ(f.feature_max, 0.94);
  const AttackBudget c = budget_preset("grb-citeseer", Scenario::Injection, Difficulty::Full);
  EXPECT_EQ(c.max_injected_nodes, 90u);
  EXPECT_EQ(budget_preset("grb-citeseer", Scenario::Injection, Difficulty::Easy).max_injected_nodes, 30u);
  EXPECT_EQ(c.max_edges_per_injected, 20u);
  EXPECT_DOUBLE_EQ(c.feature_min, -0.96);
  EXPECT_DOUBLE_EQ(c.feature_max, 0.89);
  EXPECT_EQ(code_of([] { budget_preset("unknown", Scenario::Injection); }), ErrorCode::UnknownDataset);
}

TEST(BudgetPreset, ModificationUsesEdgeRatio) {
  const AttackBudget b = budget_preset("grb-cora", Scenario::Modification, Difficulty::Full, 0.05);
  EXPECT_EQ(b.max_edits(5148), 257u);
  EXPECT_EQ(budget_preset("grb-cora", Scenario::Modification, Difficulty::Full, 0.001).max_edits(100), 0u);
}

TEST(BudgetPreset, AtTable) {
  const AtPreset p = at_preset("grb-cora");
  EXPECT_DOUBLE_EQ(p.step_size, 0.01);
  EXPECT_EQ(p.steps_per_iter, 10u);
  EXPECT_EQ(p.injected_nodes, 20u);
  EXPECT_EQ(p.edges_per_node, 20u);
  EXPECT_DOUBLE_EQ(p.feature_min, -0.94);
}

TEST(BudgetOverride, AppliesAndValidates) {
  BudgetOverride o;
  o.max_injected_nodes = 3;
  const AttackBudget b = resolve_budget("grb-cora", Scenario::Injection, Difficulty::Full, 0.05, o);
  EXPECT_EQ(b.max_injected_nodes, 3u);
  EXPECT_EQ(b.max_edges_per_injected, 20u);
  EXPECT_EQ(code_of([&] { resolve_budget("", Scenario::Injection, Difficulty::Full, 0.05, o); }),
            ErrorCode::InvalidBudget);
  o.feature_min = 0.5;
  o.feature_max = 0.1;
  EXPECT_EQ(code_of([&] { resolve_budget("grb-cora", Scenario::Injection, Difficulty::Full, 0.05, o); }),
            ErrorCode::InvalidBudget);
}
