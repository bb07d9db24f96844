#include "grb/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grb/metrics.hpp"
#include "grb/rng.hpp"

namespace grb {

GraphBundle random_small_graph(std::uint64_t seed, std::size_t num_nodes) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < num_nodes; ++u) {
    for (NodeId v = u + 1; v < num_nodes; ++v) {
      if (rng.bernoulli(0.35)) edges.push_back({u, v});
    }
  }
  FeatureMatrix x(static_cast<Eigen::Index>(num_nodes), 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(rng.normal());
  std::vector<std::uint32_t> labels(num_nodes);
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng.uniform_index(3));
  return GraphBundle("random-small", num_nodes, edges, std::move(x), std::move(labels), 3);
}

double model_grad_check(const ModelSpec& spec, const GraphBundle& g, std::uint64_t seed) {
  const TrainedModel model = init_model(spec, g.num_features(), g.num_classes(), seed);
  const OperatorPtr op = build_operator(spec.arch, g);
  std::vector<NodeId> rows(g.num_nodes());
  std::iota(rows.begin(), rows.end(), NodeId{0});
  const std::vector<std::uint32_t> labels = g.labels();
  auto loss = [&](Tape& tape, Var x) {
    ModelBinding b = bind(tape, model, false);
    return tape.nll_loss(tape.log_softmax(forward_logits(tape, model, b, op, x)), rows, labels);
  };
  return grad_check(loss, to_double(g.features()), 1e-6);
}

std::vector<GradCheckResult> model_grad_checks(std::uint64_t seed) {
  std::vector<GradCheckResult> out;
  const GraphBundle g = random_small_graph(seed);
  for (Arch arch : {Arch::GCN, Arch::SGC, Arch::TAGCN, Arch::APPNP, Arch::GIN, Arch::SAGE}) {
    for (bool ln : {false, true}) {
      const ModelSpec spec = ModelSpec::defaults(arch, ln);
      out.push_back({spec.id(), model_grad_check(spec, g, mix_seed(seed, spec.id()))});
    }
  }
  return out;
}

double metric_oracle_error(std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<double> s(n);
    for (auto& v : s) v = rng.uniform();
    for (SortOrder order : {SortOrder::Descending, SortOrder::Ascending}) {
      std::vector<double> sorted = s;
      if (order == SortOrder::Descending) {
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
      } else {
        std::sort(sorted.begin(), sorted.end());
      }
      double z = 0.0, direct = 0.0;
      for (std::size_t i = 1; i <= n; ++i) z += 1.0 / static_cast<double>(i * i);
      for (std::size_t i = 1; i <= n; ++i) direct += sorted[i - 1] / static_cast<double>(i * i) / z;
      worst = std::max(worst, std::abs(weighted_score(s, order) - direct));
    }
  }
  return worst;
}

}  // namespace grb
