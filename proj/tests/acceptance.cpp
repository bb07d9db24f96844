// Acceptance checks 1-10. One line per criterion:
//   criterion N: PASS|FAIL|SKIP|SOFT-PASS|SOFT-FAIL <details>
// Exit code: 0 pass (soft results included), 1 fail, 77 skip.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "grb/attacks.hpp"
#include "grb/bundle_io.hpp"
#include "grb/data_prep.hpp"
#include "grb/metrics.hpp"
#include "grb/selftest.hpp"
#include "grb/svd.hpp"
#include "grb/synthetic.hpp"
#include "grb/train.hpp"

using namespace grb;
using Clock = std::chrono::steady_clock;

namespace {

enum class Outcome { Pass, Fail, Skip, SoftPass, SoftFail };

struct Report {
  Outcome outcome;
  std::string details;
};

const char* label(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "PASS";
    case Outcome::Fail: return "FAIL";
    case Outcome::Skip: return "SKIP";
    case Outcome::SoftPass: return "SOFT-PASS";
    case Outcome::SoftFail: return "SOFT-FAIL";
  }
  return "?";
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Data {
  std::string name;
  GraphBundle graph;
  DifficultySplit split;
  bool real = false;
};

Data prepare(const GraphBundle& raw, std::string name, bool real, std::uint64_t seed = 0) {
  GraphBundle g = raw.with_features(standardize_arctan(raw.features()));
  SplitConfig sc;
  sc.seed = seed;
  DifficultySplit split = degree_split(g, sc);
  return {std::move(name), std::move(g), std::move(split), real};
}

std::optional<GraphBundle> load_cora_raw() {
  const char* root = std::getenv("GRB_DATA_DIR");
  if (!root || !*root) return std::nullopt;
  const auto dir = std::filesystem::path(root) / "grb-cora";
  if (!std::filesystem::exists(dir / "meta.json")) return std::nullopt;
  return load_bundle(dir);
}

/// grb-cora when installed, else the named synthetic stand-in.
Data cora_or(const std::string& fallback) {
  if (auto raw = load_cora_raw()) return prepare(*raw, "grb-cora", true);
  return prepare(generate_synthetic(synthetic_preset(fallback)), fallback, false);
}

// ---------------------------------------------------------------------------

Report criterion1() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0, worst_weights = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20);
    std::vector<double> s(n);
    for (double& x : s) x = rng.uniform();
    for (bool descending : {true, false}) {
      std::vector<double> sorted = s;
      std::sort(sorted.begin(), sorted.end());
      if (descending) std::reverse(sorted.begin(), sorted.end());
      double num = 0.0, den = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        num += sorted[i - 1] / static_cast<double>(i * i);
        den += 1.0 / static_cast<double>(i * i);
      }
      const double got = weighted_score(s, descending ? SortOrder::Descending : SortOrder::Ascending);
      worst = std::max(worst, std::abs(got - num / den));
    }
    const auto w = rank_weights(n);
    worst_weights = std::max(worst_weights, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst < 1e-12 && worst_weights < 1e-12 && secs < 1.0;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("max |weighted - direct| = %.2e (tol 1e-12), max |sum w - 1| = %.2e (tol 1e-12), %.3f s (limit 1 s)",
              worst, worst_weights, secs)};
}

Report criterion2() {
  const auto t0 = Clock::now();
  const auto results = model_grad_checks(7);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_model;
  for (const auto& r : results) {
    if (!(r.max_rel_error <= worst)) {
      worst = r.max_rel_error;
      worst_model = r.model;
    }
  }
  const bool ok = results.size() == 12 && worst < 1e-4 && secs < 30.0;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("%zu models, worst rel error %.2e on %s (tol 1e-4), %.2f s (limit 30 s)", results.size(), worst,
              worst_model.c_str(), secs)};
}

Report criterion3() {
  const Data d = cora_or("powerlaw-3000");
  const std::size_t n = d.graph.num_nodes();
  const std::size_t q = n / 10;
  const auto& s = d.split;
  bool sizes = s.test_easy.size() == q && s.test_medium.size() == q && s.test_hard.size() == q;
  std::vector<int> seen(n, 0);
  for (const auto* part : {&s.train, &s.val, &s.test_easy, &s.test_medium, &s.test_hard}) {
    for (NodeId v : *part) {
      if (v < n) ++seen[v];
    }
  }
  const bool partition = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
  const double e = mean_degree(d.graph, s.test_easy), m = mean_degree(d.graph, s.test_medium),
               h = mean_degree(d.graph, s.test_hard);
  const bool increasing = e < m && m < h;
  bool ok = sizes && partition && increasing;
  std::string details = fmt("%s N=%zu |E|=%zu |M|=%zu |H|=%zu (want %zu), disjoint cover %s, mean degree %.2f < %.2f < %.2f",
                            d.name.c_str(), n, s.test_easy.size(), s.test_medium.size(), s.test_hard.size(), q,
                            partition ? "yes" : "no", e, m, h);
  if (d.real) {
    const double ref[3] = {1.53, 2.96, 5.23}, got[3] = {e, m, h};
    for (int i = 0; i < 3; ++i) ok = ok && std::abs(got[i] - ref[i]) <= 0.15 * ref[i];
    details += ", vs 1.53/2.96/5.23 within 15%";
  } else {
    details += " (grb-cora not installed; reference degree targets not checked)";
  }
  return {ok ? Outcome::Pass : Outcome::Fail, details};
}

Report criterion4() {
  const auto raw = load_cora_raw();
  if (!raw) return {Outcome::Skip, "grb-cora not installed under GRB_DATA_DIR"};
  const FeatureMatrix x = standardize_arctan(raw->features());
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  const bool ok = std::abs(lo + 0.94) <= 0.01 && std::abs(hi - 0.94) <= 0.01 && lo > -1.0 && hi < 1.0;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("normalized range [%.4f, %.4f], want [-0.94, 0.94] +-0.01 and strictly inside (-1, 1)", lo, hi)};
}

TrainedModel train_model(const Data& d, Arch arch, bool ln, std::uint64_t seed, const AtConfig* at = nullptr) {
  TrainConfig tc;
  tc.seed = seed;
  const ModelSpec spec = ModelSpec::defaults(arch, ln);
  return at ? adversarial_train(spec, d.graph, d.split, tc, *at) : train(spec, d.graph, d.split, tc);
}

Report criterion5() {
  const auto raw = load_cora_raw();
  if (!raw) return {Outcome::Skip, "grb-cora not installed under GRB_DATA_DIR"};
  const Data d = prepare(*raw, "grb-cora", true);
  const auto t0 = Clock::now();
  const TrainedModel m = train_model(d, Arch::GCN, true, 1);
  const double secs = seconds_since(t0);
  const double acc = 100.0 * subset_accuracy(predict(m, d.graph), d.graph.labels(), d.split.test_full());
  const bool ok = acc >= 78.0 && acc <= 88.0 && secs < 300.0;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("GCN+LN test-full accuracy %.2f (want [78, 88]), trained in %.1f s (limit 300 s)", acc, secs)};
}

struct DropStats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> drops;
};

DropStats stats(std::vector<double> drops) {
  DropStats s;
  s.mean = grb::mean(drops);
  s.std = stddev(drops);
  s.drops = std::move(drops);
  return s;
}

/// FGSM with the dataset preset at F difficulty, one attacked graph per seed,
/// every model scored on the same graphs. Drops are in points.
std::vector<DropStats> fgsm_drops(const Data& d, const std::vector<const TrainedModel*>& models, std::size_t seeds) {
  const auto surrogate = std::make_shared<const TrainedModel>(train_model(d, Arch::GCN, false, 1000));
  const auto tf = d.split.test_full();
  const AttackBudget budget = budget_preset(d.name, Scenario::Injection, Difficulty::Full);
  AttackParams p;
  p.step_size = dataset_preset(d.name).step_size;
  p.iterations = dataset_preset(d.name).iterations;
  std::vector<double> clean;
  for (const auto* m : models) clean.push_back(subset_accuracy(predict(*m, d.graph), d.graph.labels(), tf));
  std::vector<std::vector<double>> drops(models.size());
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto ctx = make_attack_context(surrogate, d.graph, d.split, Difficulty::Full, budget, 500 + s);
    const GraphBundle att = apply_attack(d.graph, inject_fgsm(ctx, p));
    for (std::size_t i = 0; i < models.size(); ++i) {
      drops[i].push_back(100.0 * (clean[i] - subset_accuracy(predict(*models[i], att), att.labels(), tf)));
    }
  }
  std::vector<DropStats> out;
  for (auto& v : drops) out.push_back(stats(std::move(v)));
  return out;
}

std::string data_note(const Data& d) {
  return d.real ? "grb-cora" : d.name + " (grb-cora not installed; cora-sized synthetic stand-in, same preset)";
}

Report criterion6() {
  const auto t0 = Clock::now();
  const Data d = cora_or("synth-cora");
  const TrainedModel target = train_model(d, Arch::GCN, true, 1);
  const DropStats s = fgsm_drops(d, {&target}, 10).front();
  const double secs = seconds_since(t0);
  const bool ok = s.mean >= 4.0 && secs < 900.0;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("%s: FGSM vs GCN+LN drop %.2f +- %.2f points over 10 seeds (want >= 4), %.0f s (limit 900 s)",
              data_note(d).c_str(), s.mean, s.std, secs)};
}

Report criterion7() {
  const Data d = cora_or("synth-cora");
  const TrainedModel vanilla = train_model(d, Arch::GCN, false, 1);
  const AtConfig at = AtConfig::from_preset(at_preset(d.name));
  const TrainedModel robust = train_model(d, Arch::GCN, false, 1, &at);
  const auto s = fgsm_drops(d, {&vanilla, &robust}, 10);
  const bool ok = s[1].mean < s[0].mean;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("%s: FGSM drop GCN %.2f +- %.2f vs GCN+AT %.2f +- %.2f points over 10 seeds (want AT strictly smaller)",
              data_note(d).c_str(), s[0].mean, s[0].std, s[1].mean, s[1].std)};
}

// Independent recount of one attack payload. Returns the problems found.
std::vector<std::string> recount(const GraphBundle& g, const AttackResult& r, const AttackBudget& b) {
  std::vector<std::string> bad;
  const std::size_t n = g.num_nodes();
  auto in_range = [&](double x) { return std::isfinite(x) && x >= b.feature_min && x <= b.feature_max; };
  const GraphBundle att = apply_attack(g, r);
  if (b.scenario == Scenario::Injection) {
    const InjectionPatch& p = r.patch;
    if (p.num_injected > b.max_injected_nodes) bad.push_back("too many injected nodes");
    std::vector<std::size_t> deg(p.num_injected, 0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& [i, t] : p.target_edges) {
      if (i >= p.num_injected || t >= n || !seen.insert({i, t}).second) bad.push_back("bad target edge");
      if (i < p.num_injected) ++deg[i];
    }
    for (const auto& [a, c] : p.internal_edges) {
      if (a >= p.num_injected || c >= p.num_injected || a == c) bad.push_back("bad internal edge");
      if (a < p.num_injected) ++deg[a];
      if (c < p.num_injected) ++deg[c];
    }
    for (std::size_t x : deg) {
      if (x > b.max_edges_per_injected || x == 0) bad.push_back("injected degree out of budget");
    }
    for (Eigen::Index i = 0; i < p.features.size(); ++i) {
      if (!in_range(p.features.data()[i])) bad.push_back("injected feature out of range");
    }
    if (att.num_nodes() != n + p.num_injected) bad.push_back("node count after injection");
    if (!(att.features().topRows(static_cast<Eigen::Index>(n)) == g.features())) bad.push_back("host features changed");
    for (NodeId u = 0; u < n; ++u) {
      std::size_t host_deg = 0;
      for (NodeId v : att.neighbors(u)) host_deg += v < n ? 1 : 0;
      if (host_deg != g.degree(u)) bad.push_back("host edges changed");
    }
    if (!r.edits.empty() || !r.feature_nodes.empty()) bad.push_back("host payload in an injection result");
  } else {
    const auto limit = static_cast<std::size_t>(std::floor(b.edge_ratio * static_cast<double>(g.num_edges())));
    if (r.edits.size() > limit) bad.push_back("too many edits");
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
    }
    for (const auto& e : r.edits) {
      if (e.u >= n || e.v >= n || e.u == e.v) {
        bad.push_back("bad edit");
        continue;
      }
      const bool present = a(e.u, e.v) != 0.0;
      if ((e.kind == EditKind::Add) == present) bad.push_back("edit does not flip");
      a(e.u, e.v) = a(e.v, e.u) = present ? 0.0 : 1.0;
    }
    std::size_t edges = 0;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        edges += a(u, v) != 0.0;
        if ((a(u, v) != 0.0) != att.has_edge(u, v)) bad.push_back("edited graph mismatch");
      }
    }
    if (edges != att.num_edges()) bad.push_back("edited edge count mismatch");
    for (NodeId v = 0; v < n; ++v) {
      const bool declared = std::find(r.feature_nodes.begin(), r.feature_nodes.end(), v) != r.feature_nodes.end();
      if (declared && !r.feature_perturbation) bad.push_back("undeclared feature change");
      if (!declared && !(att.features().row(v) == g.features().row(v))) bad.push_back("feature row changed");
      if (declared) {
        for (Eigen::Index j = 0; j < att.features().cols(); ++j) {
          if (!in_range(att.features()(v, j))) bad.push_back("perturbed feature out of range");
        }
      }
    }
  }
  return bad;
}

Report criterion8() {
  const std::vector<AttackMethod> methods{
      AttackMethod::InjectRnd, AttackMethod::InjectFgsm, AttackMethod::InjectPgd, AttackMethod::InjectSpeit,
      AttackMethod::InjectTdgia, AttackMethod::ModRnd,   AttackMethod::ModDice,   AttackMethod::ModFlip,
      AttackMethod::ModFga,    AttackMethod::ModPgd};
  Rng rng(8);
  std::size_t violations = 0, checker = 0, runs = 0;
  std::string first;
  for (int trial = 0; trial < 1000; ++trial) {
    const AttackMethod m = methods[static_cast<std::size_t>(trial) % methods.size()];
    const std::size_t n = 8 + rng.uniform_index(25);
    std::vector<Edge> edges;
    const double p = rng.uniform(0.05, 0.4);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (rng.bernoulli(p)) edges.push_back({u, v});
      }
    }
    FeatureMatrix x(static_cast<Eigen::Index>(n), 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(std::tanh(rng.normal()));
    std::vector<std::uint32_t> labels(n);
    for (auto& l : labels) l = static_cast<std::uint32_t>(rng.uniform_index(3));
    const GraphBundle g("random", n, edges, std::move(x), std::move(labels), 3);
    ModelSpec spec = ModelSpec::defaults(Arch::GCN);
    spec.hidden_sizes = {8};
    auto sur = std::make_shared<const TrainedModel>(init_model(spec, 4, 3, rng.next_u64()));

    AttackBudget b;
    b.scenario = scenario_of(m);
    b.feature_min = -rng.uniform(0.05, 1.5);
    b.feature_max = rng.uniform(0.05, 1.5);
    b.max_injected_nodes = 1 + rng.uniform_index(8);
    b.max_edges_per_injected = 1 + rng.uniform_index(6);
    b.edge_ratio = rng.uniform(0.01, 0.5);
    AttackContext ctx;
    ctx.surrogate = sur;
    ctx.host = g;
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), 0u);
    rng.shuffle(all);
    ctx.targets.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(1 + rng.uniform_index(n)));
    ctx.labeled.assign(all.begin() + static_cast<std::ptrdiff_t>(ctx.targets.size()), all.end());
    ctx.budget = b;
    ctx.seed = rng.next_u64();
    AttackParams params;
    params.iterations = 2 + rng.uniform_index(8);
    params.step_size = rng.uniform(0.005, 0.3);
    params.fga_interval = 1 + rng.uniform_index(4);

    const AttackResult r = run_attack(m, ctx, params);
    ++runs;
    const auto found = recount(g, r, b);
    if (!found.empty()) {
      ++violations;
      if (first.empty()) first = std::string(to_string(m)) + ": " + found.front();
    }
    if (!check_budget(g, r, b).empty()) ++checker;
  }
  const bool ok = violations == 0 && checker == 0 && runs == 1000;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("%zu runs over 10 methods, %zu recount violations, %zu check_budget violations%s%s", runs, violations,
              checker, first.empty() ? "" : "; first: ", first.c_str())};
}

// Dense oracle: Frobenius error of the best rank-k approximation is the root
// sum of squares of the discarded |eigenvalues|.
std::vector<double> oracle_errors(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  std::vector<double> mags(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> err(mags.size() + 1, 0.0);
  for (std::size_t k = mags.size(); k-- > 0;) err[k] = std::sqrt(err[k + 1] * err[k + 1] + mags[k] * mags[k]);
  return err;
}

Report criterion9() {
  Rng rng(9);
  struct Case {
    std::string name;
    GraphBundle g;
  };
  std::vector<Case> cases;
  {
    // Five disjoint complete bipartite blocks: rank 10.
    std::vector<Edge> edges;
    NodeId base = 0;
    for (int blk = 0; blk < 5; ++blk) {
      const NodeId l = 3 + blk, r = 5 + 2 * blk;
      for (NodeId u = 0; u < l; ++u) {
        for (NodeId v = 0; v < r; ++v) edges.push_back({base + u, base + l + v});
      }
      base += l + r;
    }
    cases.push_back({"bipartite blocks", GraphBundle("blocks", base, edges, FeatureMatrix::Zero(base, 1),
                                                     std::vector<std::uint32_t>(base, 0), 1)});
  }
  for (std::size_t n : {60, 200}) {
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (rng.bernoulli(4.0 / static_cast<double>(n))) edges.push_back({u, v});
      }
    }
    cases.push_back({"random n=" + std::to_string(n),
                     GraphBundle("random", n, edges, FeatureMatrix::Zero(static_cast<Eigen::Index>(n), 1),
                                 std::vector<std::uint32_t>(n, 0), 1)});
  }

  bool ok = true;
  std::string details;
  for (const auto& c : cases) {
    const Matrix a = c.g.adjacency_matrix().to_dense();
    const auto oracle = oracle_errors(a);
    const std::size_t n = c.g.num_nodes();
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) rank += std::abs(es.eigenvalues()(i)) > 1e-9 ? 1 : 0;
    double prev = std::numeric_limits<double>::infinity(), worst_gap = 0.0, exact_err = 0.0;
    bool monotone = true;
    const std::size_t step = n > 100 ? 5 : 1;
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= n; k += step) ks.push_back(k);
    if (std::find(ks.begin(), ks.end(), rank) == ks.end()) ks.push_back(rank);
    if (ks.back() != n) ks.push_back(n);
    std::sort(ks.begin(), ks.end());
    for (std::size_t k : ks) {
      const double err = (a - svd_low_rank(c.g, k).adjacency).norm();
      monotone = monotone && err <= prev + 1e-9;
      prev = err;
      worst_gap = std::max(worst_gap, oracle[k] - err);  // positive: beat the optimum
      if (k >= rank) exact_err = std::max(exact_err, err);
    }
    const bool case_ok = monotone && exact_err < 1e-10 && worst_gap < 1e-9;
    ok = ok && case_ok;
    details += fmt("%s%s (N=%zu, rank %zu): monotone %s, max error for k>=rank %.1e, never below oracle %s",
                   details.empty() ? "" : "; ", c.name.c_str(), n, rank, monotone ? "yes" : "no", exact_err,
                   worst_gap < 1e-9 ? "yes" : "no");
  }
  return {ok ? Outcome::Pass : Outcome::Fail, details + " (tol 1e-10)"};
}

Report criterion10() {
  Data d = cora_or("powerlaw-1000");
  const TrainedModel target = train_model(d, Arch::GCN, true, 1);
  const auto surrogate = std::make_shared<const TrainedModel>(train_model(d, Arch::GCN, false, 1000));
  double drop[2] = {0.0, 0.0};
  const Difficulty diffs[2] = {Difficulty::Easy, Difficulty::Hard};
  std::size_t count = 0;
  for (int k = 0; k < 2; ++k) {
    const auto mask = d.split.test(diffs[k]);
    const double clean = subset_accuracy(predict(target, d.graph), d.graph.labels(), mask);
    const AttackBudget budget = budget_preset(d.name, Scenario::Injection, diffs[k]);
    AttackParams p;
    p.iterations = dataset_preset(d.name).iterations;
    for (AttackMethod m : {AttackMethod::InjectRnd, AttackMethod::InjectFgsm, AttackMethod::InjectPgd}) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        const auto ctx = make_attack_context(surrogate, d.graph, d.split, diffs[k], budget, 900 + s);
        const GraphBundle att = apply_attack(d.graph, run_attack(m, ctx, p));
        drop[k] += 100.0 * (clean - subset_accuracy(predict(target, att), att.labels(), mask));
        count += k == 0 ? 1 : 0;
      }
    }
  }
  drop[0] /= static_cast<double>(count);
  drop[1] /= static_cast<double>(count);
  const std::string where =
      d.real ? "grb-cora" : d.name + " (grb-cora not installed; power-law stand-in)";
  return {drop[0] > drop[1] ? Outcome::SoftPass : Outcome::SoftFail,
          fmt("%s: mean drop over RND/FGSM/PGD x 5 seeds on GCN+LN, Easy %.2f vs Hard %.2f points (want Easy > Hard)",
              where.c_str(), drop[0], drop[1])};
}

const std::vector<std::function<Report()>> kCriteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9, criterion10};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run one criterion (1-10); default: all")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  bool failed = false, skipped = false;
  for (int i = 1; i <= 10; ++i) {
    if (only != 0 && i != only) continue;
    Report r;
    try {
      r = kCriteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& e) {
      r = {Outcome::Fail, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d: %s %s\n", i, label(r.outcome), r.details.c_str());
    std::fflush(stdout);
    failed = failed || r.outcome == Outcome::Fail;
    skipped = skipped || r.outcome == Outcome::Skip;
  }
  if (failed) return 1;
  return only != 0 && skipped ? 77 : 0;
}
