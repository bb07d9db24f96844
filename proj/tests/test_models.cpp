#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "grb/bundle_io.hpp"
#include "grb/error.hpp"
#include "grb/models.hpp"
#include "support.hpp"

using namespace grb;

namespace {

constexpr Arch kArchs[] = {Arch::GCN, Arch::SGC, Arch::TAGCN, Arch::APPNP, Arch::GIN, Arch::SAGE};

Matrix& param(TrainedModel& m, const std::string& name) {
  for (auto& p : m.params) {
    if (p.name == name) return p.value;
  }
  throw std::runtime_error("no parameter " + name);
}

Matrix dense_gcn_oracle(const GraphBundle& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Identity(n, n);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
  }
  const Eigen::VectorXd d = a.rowwise().sum().array().rsqrt();
  return d.asDiagonal() * a * d.asDiagonal();
}

}  // namespace

TEST(GcnNormalize, IsolatedNodeAndSingleEdge) {
  EXPECT_EQ(gcn_normalize(grb::testing::make_graph(1, {}))->to_dense()(0, 0), 1.0);
  EXPECT_TRUE(gcn_normalize(grb::testing::make_graph(2, {{0, 1}}))->to_dense().isApprox(Matrix::Constant(2, 2, 0.5)));
}

TEST(GcnNormalize, StarMatchesDenseOracle) {
  const GraphBundle star = grb::testing::make_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const Matrix op = gcn_normalize(star)->to_dense();
  EXPECT_LT((op - dense_gcn_oracle(star)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(op.isApprox(op.transpose(), 0.0));
}

TEST(Normalize, RowNormalizedRowsSumToOne) {
  const Matrix m = row_normalize(grb::testing::random_graph(12, 0.3, 1))->to_dense();
  for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_NEAR(m.row(i).sum(), 1.0, 1e-15);
}

TEST(Forward, ZeroWeightsGiveZeroLogitsAndClassZero) {
  const GraphBundle g = grb::testing::random_graph(10, 0.3, 2, 4, 3);
  TrainedModel m = init_model(ModelSpec::defaults(Arch::GCN), 4, 3, 1);
  for (auto& p : m.params) p.value.setZero();
  const Matrix logits = forward_logits(m, gcn_normalize(g), to_double(g.features()));
  EXPECT_TRUE(logits.isZero(0.0));
  for (auto c : predict(m, g)) EXPECT_EQ(c, 0u);
}

TEST(Forward, SgcOnIdentityReturnsWeightRows) {
  // No edges: the normalized adjacency is the identity.
  const GraphBundle g(grb::testing::make_graph(3, {}).with_features(FeatureMatrix::Identity(3, 3)));
  ModelSpec spec = ModelSpec::defaults(Arch::SGC);
  spec.hops = 1;
  const TrainedModel m = init_model(spec, 3, 2, 4);
  const Matrix logits = forward_logits(m, gcn_normalize(g), Matrix::Identity(3, 3));
  EXPECT_TRUE(logits.isApprox(m.param("linear.weight"), 1e-15));
}

TEST(Forward, AppnpAlphaOneIsTheMlpHead) {
  const GraphBundle g = grb::testing::random_graph(9, 0.4, 3);
  ModelSpec spec = ModelSpec::defaults(Arch::APPNP);
  spec.alpha = 1.0;
  const TrainedModel m = init_model(spec, 4, 3, 2);
  const Matrix x = to_double(g.features());
  Matrix h = ((x * m.param("mlp0.weight")).rowwise() + m.param("mlp0.bias").row(0)).cwiseMax(0.0);
  const Matrix head = (h * m.param("mlp1.weight")).rowwise() + m.param("mlp1.bias").row(0);
  EXPECT_LT((forward_logits(m, gcn_normalize(g), x) - head).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Predict, ArgmaxTieBreak) {
  Matrix l(2, 2);
  l << 0.1, 0.9, 0.5, 0.5;
  EXPECT_EQ(argmax_rows(l), (std::vector<std::uint32_t>{1, 0}));
}

TEST(Forward, SgcEqualsLinearGcn) {
  // k = 1: one propagation then a linear map, computed densely.
  const GraphBundle g = grb::testing::random_graph(8, 0.4, 5);
  ModelSpec sgc = ModelSpec::defaults(Arch::SGC);
  sgc.hops = 1;
  const TrainedModel s = init_model(sgc, 4, 3, 6);
  const Matrix x = to_double(g.features());
  const Matrix oracle =
      (dense_gcn_oracle(g) * x * s.param("linear.weight")).rowwise() + s.param("linear.bias").row(0);
  EXPECT_LT((forward_logits(s, gcn_normalize(g), x) - oracle).cwiseAbs().maxCoeff(), 1e-12);

  // k = 2 against a two-layer GCN whose hidden activations stay positive, so
  // relu is the identity and the weights collapse to W0 W1.
  ModelSpec gcn = ModelSpec::defaults(Arch::GCN);
  gcn.hidden_sizes = {5};
  TrainedModel m = init_model(gcn, 4, 3, 7);
  param(m, "conv0.weight") = param(m, "conv0.weight").cwiseAbs();
  const Matrix xp = x.cwiseAbs();
  sgc.hops = 2;
  TrainedModel s2 = init_model(sgc, 4, 3, 8);
  param(s2, "linear.weight") = m.param("conv0.weight") * m.param("conv1.weight");
  param(s2, "linear.bias") = m.param("conv1.bias");
  const OperatorPtr op = gcn_normalize(g);
  EXPECT_LT((forward_logits(m, op, xp) - forward_logits(s2, op, xp)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const GraphBundle g = grb::testing::random_graph(20 + 10 * seed, 0.2, seed);
    std::vector<NodeId> perm(g.num_nodes());
    std::iota(perm.begin(), perm.end(), NodeId{0});
    Rng rng(seed + 100);
    rng.shuffle(perm);
    const GraphBundle p = permute_nodes(g, perm);
    for (Arch arch : kArchs) {
      for (bool ln : {false, true}) {
        const TrainedModel m = init_model(ModelSpec::defaults(arch, ln), 4, 3, seed);
        const Matrix a = forward_logits(m, build_operator(arch, g), to_double(g.features()));
        const Matrix b = forward_logits(m, build_operator(arch, p), to_double(p.features()));
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
          EXPECT_LT((a.row(v) - b.row(perm[v])).cwiseAbs().maxCoeff(), 1e-9) << ModelSpec::defaults(arch, ln).id();
        }
      }
    }
  }
}

TEST(Forward, LayerNormKeepsLogitsFiniteForHugeInputs) {
  const GraphBundle g = grb::testing::random_graph(15, 0.3, 9);
  const Matrix x = to_double(g.features()) * 1e3;
  for (Arch arch : kArchs) {
    const TrainedModel m = init_model(ModelSpec::defaults(arch, true), 4, 3, 1);
    const Matrix logits = forward_logits(m, build_operator(arch, g), x);
    EXPECT_TRUE(logits.allFinite()) << to_string(arch);
    // The input LN bounds every normalized entry by sqrt(D), so the scaled
    // logits match the unscaled ones up to the LN epsilon.
    const Matrix base = forward_logits(m, build_operator(arch, g), to_double(g.features()));
    EXPECT_LT((logits - base).cwiseAbs().maxCoeff(), 1e-3) << to_string(arch);
  }
}

TEST(Forward, ShapeMismatch) {
  const GraphBundle g = grb::testing::random_graph(6, 0.3, 1);
  const TrainedModel m = init_model(ModelSpec::defaults(Arch::GCN), 5, 3, 1);
  try {
    forward_logits(m, gcn_normalize(g), to_double(g.features()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(ModelSpec, Validation) {
  ModelSpec s = ModelSpec::defaults(Arch::GCN);
  s.hidden_sizes.clear();
  EXPECT_THROW(s.validate(), Error);
  s = ModelSpec::defaults(Arch::GCN);
  s.dropout = 1.0;
  EXPECT_THROW(s.validate(), Error);
  s = ModelSpec::defaults(Arch::SGC);
  s.hops = 0;
  EXPECT_THROW(s.validate(), Error);
  EXPECT_EQ(ModelSpec::defaults(Arch::SGC).hops, 4);
  EXPECT_EQ(ModelSpec::defaults(Arch::TAGCN).hops, 2);
  EXPECT_EQ(ModelSpec::defaults(Arch::APPNP).hops, 10);
  EXPECT_DOUBLE_EQ(ModelSpec::defaults(Arch::APPNP).alpha, 0.01);
  EXPECT_EQ(ModelSpec::defaults(Arch::GCN).hidden_sizes, (std::vector<std::size_t>{64, 64, 64}));
}

TEST(Checkpoint, RoundTripAndRejectsTampering) {
  const TrainedModel m = init_model(ModelSpec::defaults(Arch::TAGCN, true), 7, 4, 11);
  const auto dir = grb::testing::temp_dir("ckpt");
  save_checkpoint(m, dir / "m.grbm");
  const TrainedModel back = load_checkpoint(dir / "m.grbm");
  ASSERT_EQ(back.params.size(), m.params.size());
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    EXPECT_EQ(back.params[i].name, m.params[i].name);
    // The blob is f32.
    EXPECT_TRUE(back.params[i].value.isApprox(m.params[i].value.cast<float>().cast<double>(), 0.0));
  }
  EXPECT_EQ(back.spec.id(), m.spec.id());
  std::string bytes = io::read_text_file(dir / "m.grbm");
  bytes[0] = 'X';
  io::write_text_file(dir / "bad.grbm", bytes);
  EXPECT_THROW(load_checkpoint(dir / "bad.grbm"), Error);
}
