#include "grb/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "grb/bundle_io.hpp"
#include "grb/error.hpp"
#include "grb/rng.hpp"

namespace grb {

using nlohmann::json;

namespace {

struct MethodInfo {
  AttackMethod method;
  const char* name;
  Scenario scenario;
  bool features;
};

constexpr MethodInfo kMethods[] = {
    {AttackMethod::InjectRnd, "RND", Scenario::Injection, false},
    {AttackMethod::InjectFgsm, "FGSM", Scenario::Injection, false},
    {AttackMethod::InjectPgd, "PGD", Scenario::Injection, false},
    {AttackMethod::InjectSpeit, "SPEIT", Scenario::Injection, false},
    {AttackMethod::InjectTdgia, "TDGIA", Scenario::Injection, false},
    {AttackMethod::ModRnd, "RND-mod", Scenario::Modification, false},
    {AttackMethod::ModDice, "DICE", Scenario::Modification, false},
    {AttackMethod::ModFlip, "FLIP", Scenario::Modification, false},
    {AttackMethod::ModFga, "FGA", Scenario::Modification, false},
    {AttackMethod::ModPgd, "PGD-mod", Scenario::Modification, true},
};

const MethodInfo& info(AttackMethod m) {
  for (const auto& i : kMethods) {
    if (i.method == m) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown attack method");
}

std::uint64_t pair_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::vector<std::uint32_t> gather(const std::vector<std::uint32_t>& values, std::span<const NodeId> rows) {
  std::vector<std::uint32_t> out;
  out.reserve(rows.size());
  for (NodeId r : rows) out.push_back(values[r]);
  return out;
}

double agreement(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                 std::span<const NodeId> rows) {
  if (rows.empty()) return 1.0;
  std::size_t same = 0;
  for (NodeId r : rows) same += a[r] == b[r] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(rows.size());
}

void require_scenario(const AttackContext& ctx, Scenario s, std::string_view method) {
  if (!ctx.surrogate) throw Error(ErrorCode::InvalidArgument, "attack context has no surrogate");
  if (ctx.targets.empty()) throw Error(ErrorCode::InvalidArgument, "attack context has no targets");
  if (ctx.budget.scenario != s) {
    throw Error(ErrorCode::InvalidBudget,
                std::string(method) + " needs a " + std::string(to_string(s)) + " budget");
  }
  ctx.budget.validate();
  if (ctx.surrogate->input_dim != ctx.host.num_features()) {
    throw Error(ErrorCode::ShapeMismatch, "surrogate input dim does not match host features");
  }
  for (NodeId t : ctx.targets) {
    if (t >= ctx.host.num_nodes()) throw Error(ErrorCode::InvalidTarget, "target out of range");
  }
}

// Clean surrogate predictions; the attack loss uses them in place of the
// withheld test labels.
std::vector<std::uint32_t> surrogate_predictions(const AttackContext& ctx) {
  return predict(*ctx.surrogate, ctx.host);
}

AttackResult finalize(const AttackContext& ctx, AttackResult r, const std::vector<std::uint32_t>& clean) {
  auto violations = check_budget(ctx.host, r, ctx.budget);
  if (!violations.empty()) {
    throw Error(ErrorCode::InvalidBudget, r.method + " produced an inadmissible payload: " + violations.front());
  }
  const GraphBundle attacked = apply_attack(ctx.host, r);
  r.surrogate_accuracy_after = agreement(predict(*ctx.surrogate, attacked), clean, ctx.targets);
  return r;
}

FeatureMatrix to_float(const Matrix& m) { return m.cast<float>(); }

void clamp_inplace(Matrix& x, double lo, double hi) { x = x.cwiseMax(lo).cwiseMin(hi); }

std::size_t edges_per_node(const AttackContext& ctx) {
  return std::min<std::size_t>(ctx.budget.max_edges_per_injected, ctx.targets.size());
}

}  // namespace

std::string_view to_string(AttackMethod m) { return info(m).name; }

AttackMethod parse_attack(std::string_view text) {
  std::string t(text);
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const auto& i : kMethods) {
    std::string name(i.name);
    for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (name == t) return i.method;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown attack '" + std::string(text) + "'");
}

Scenario scenario_of(AttackMethod m) { return info(m).scenario; }
bool perturbs_features(AttackMethod m) { return info(m).features; }

AttackContext make_attack_context(std::shared_ptr<const TrainedModel> surrogate, const GraphBundle& g,
                                  const DifficultySplit& split, Difficulty difficulty, const AttackBudget& budget,
                                  std::uint64_t seed) {
  AttackContext ctx;
  ctx.surrogate = std::move(surrogate);
  ctx.labeled = split.train_val();
  std::vector<std::uint32_t> labels(g.num_nodes(), g.label_sentinel());
  for (NodeId v : ctx.labeled) labels[v] = g.labels()[v];
  ctx.host = g.with_labels(std::move(labels));
  ctx.targets = split.test(difficulty);
  ctx.budget = budget;
  ctx.seed = seed;
  return ctx;
}

std::pair<double, double> float_safe_range(double lo, double hi) {
  float flo = static_cast<float>(lo);
  if (static_cast<double>(flo) < lo) flo = std::nextafter(flo, std::numeric_limits<float>::infinity());
  float fhi = static_cast<float>(hi);
  if (static_cast<double>(fhi) > hi) fhi = std::nextafter(fhi, -std::numeric_limits<float>::infinity());
  return {static_cast<double>(flo), static_cast<double>(fhi)};
}

// ---------------------------------------------------------------------------
// Budget checker

std::vector<std::string> check_budget(const GraphBundle& original, const AttackResult& result,
                                      const AttackBudget& budget) {
  std::vector<std::string> out;
  const std::size_t n = original.num_nodes();
  const std::size_t d = original.num_features();
  auto in_range = [&](float value) {
    const double x = static_cast<double>(value);
    return std::isfinite(x) && x >= budget.feature_min && x <= budget.feature_max;
  };

  if (result.scenario != budget.scenario) out.push_back("scenario mismatch");

  if (budget.scenario == Scenario::Injection) {
    const InjectionPatch& p = result.patch;
    if (!result.edits.empty()) out.push_back("original edges modified");
    if (result.feature_perturbation || !result.feature_nodes.empty()) out.push_back("original features modified");
    if (p.num_injected > budget.max_injected_nodes) {
      out.push_back("node count " + std::to_string(p.num_injected) + " > " +
                    std::to_string(budget.max_injected_nodes));
    }
    if (static_cast<std::size_t>(p.features.rows()) != p.num_injected ||
        (p.num_injected > 0 && static_cast<std::size_t>(p.features.cols()) != d)) {
      out.push_back("feature shape");
    } else {
      for (Eigen::Index i = 0; i < p.features.size(); ++i) {
        if (!in_range(p.features.data()[i])) {
          out.push_back("feature range");
          break;
        }
      }
    }
    std::vector<std::size_t> deg(p.num_injected, 0);
    std::unordered_set<std::uint64_t> seen;
    bool bad_target = false, bad_index = false, duplicate = false;
    for (const auto& [i, t] : p.target_edges) {
      if (i >= p.num_injected) {
        bad_index = true;
        continue;
      }
      if (t >= n) {
        bad_target = true;
        continue;
      }
      if (!seen.insert((static_cast<std::uint64_t>(i) << 32) | t).second) duplicate = true;
      ++deg[i];
    }
    std::unordered_set<std::uint64_t> seen_internal;
    for (const auto& [a, b] : p.internal_edges) {
      if (a >= p.num_injected || b >= p.num_injected || a == b) {
        bad_index = true;
        continue;
      }
      if (!seen_internal.insert(pair_key(a, b)).second) duplicate = true;
      ++deg[a];
      ++deg[b];
    }
    if (bad_target) out.push_back("invalid target");
    if (bad_index) out.push_back("invalid injected index");
    if (duplicate) out.push_back("duplicate edge");
    for (std::size_t i = 0; i < p.num_injected; ++i) {
      if (deg[i] > budget.max_edges_per_injected) {
        out.push_back("edges per node: injected " + std::to_string(i) + " has " + std::to_string(deg[i]));
        break;
      }
    }
    for (std::size_t i = 0; i < p.num_injected; ++i) {
      if (deg[i] == 0) {
        out.push_back("isolated injected node " + std::to_string(i));
        break;
      }
    }
    return out;
  }

  if (result.patch.num_injected != 0 || !result.patch.target_edges.empty()) out.push_back("nodes injected");
  const std::size_t limit = budget.max_edits(original.num_edges());
  if (result.edits.size() > limit) {
    out.push_back("edit count " + std::to_string(result.edits.size()) + " > " + std::to_string(limit));
  }
  std::unordered_set<std::uint64_t> added, removed;
  for (const auto& e : result.edits) {
    if (e.u >= n || e.v >= n || e.u == e.v) {
      out.push_back("invalid edit endpoints");
      break;
    }
    const std::uint64_t key = pair_key(e.u, e.v);
    const bool present = (original.has_edge(e.u, e.v) && !removed.count(key)) || added.count(key);
    if (e.kind == EditKind::Add) {
      if (present) {
        out.push_back("add of existing edge");
        break;
      }
      removed.erase(key);
      if (!original.has_edge(e.u, e.v)) added.insert(key);
    } else {
      if (!present) {
        out.push_back("remove of missing edge");
        break;
      }
      added.erase(key);
      if (original.has_edge(e.u, e.v)) removed.insert(key);
    }
  }
  if (!result.feature_nodes.empty() || result.feature_values.size() != 0) {
    if (!result.feature_perturbation) out.push_back("features modified by a structure-only method");
    if (static_cast<std::size_t>(result.feature_values.rows()) != result.feature_nodes.size() ||
        static_cast<std::size_t>(result.feature_values.cols()) != d) {
      out.push_back("feature shape");
    } else {
      for (Eigen::Index i = 0; i < result.feature_values.size(); ++i) {
        if (!in_range(result.feature_values.data()[i])) {
          out.push_back("feature range");
          break;
        }
      }
    }
    std::unordered_set<NodeId> rows;
    for (NodeId v : result.feature_nodes) {
      if (v >= n || !rows.insert(v).second) {
        out.push_back("invalid feature row");
        break;
      }
    }
  }
  return out;
}

GraphBundle apply_attack(const GraphBundle& g, const AttackResult& result) {
  if (result.scenario == Scenario::Injection) return apply_injection(g, result.patch);
  GraphBundle out = apply_edits(g, result.edits);
  if (!result.feature_nodes.empty()) {
    FeatureMatrix x = out.features();
    for (std::size_t i = 0; i < result.feature_nodes.size(); ++i) {
      x.row(result.feature_nodes[i]) = result.feature_values.row(static_cast<Eigen::Index>(i));
    }
    out = out.with_features(std::move(x));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Injection objective

InjectionObjective::InjectionObjective(const TrainedModel& model, const GraphBundle& host,
                                       const InjectionPatch& topology, std::vector<NodeId> rows,
                                       std::vector<std::uint32_t> labels, InjectionLoss loss)
    : model_(model), rows_(std::move(rows)), labels_(std::move(labels)), loss_(loss), num_host_(host.num_nodes()) {
  InjectionPatch zero = topology;
  zero.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(topology.num_injected),
                                      static_cast<Eigen::Index>(host.num_features()));
  op_ = build_operator(model.spec.arch, apply_injection(host, zero));
  host_features_ = to_double(host.features());
}

double InjectionObjective::evaluate(const Matrix& injected, Matrix* grad) const {
  Tape tape(false);
  Var xh = tape.input(host_features_, false);
  Var xi = tape.input(injected, grad != nullptr);
  Var logits = forward_logits(tape, model_, bind(tape, model_, false), op_, tape.concat_rows(xh, xi));
  Var loss = loss_ == InjectionLoss::CrossEntropy ? tape.nll_loss(tape.log_softmax(logits), rows_, labels_)
                                                  : tape.margin_loss(logits, rows_, labels_);
  if (grad) {
    tape.backward(loss);
    *grad = tape.grad(xi);
  }
  return tape.value(loss)(0, 0);
}

Matrix InjectionObjective::host_logits(const Matrix& injected) const {
  Tape tape(false);
  Var x = tape.concat_rows(tape.input(host_features_), tape.input(injected));
  return tape.value(forward_logits(tape, model_, bind(tape, model_, false), op_, x)).topRows(num_host_);
}

InjectionPatch random_injection_topology(std::size_t n, std::size_t edges, std::span<const NodeId> targets,
                                         std::size_t num_features, Rng& rng) {
  InjectionPatch p;
  p.num_injected = n;
  p.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(num_features));
  const std::size_t e = std::min(edges, targets.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto picked = rng.sample(targets, e);
    std::sort(picked.begin(), picked.end());
    for (NodeId t : picked) p.target_edges.emplace_back(static_cast<std::uint32_t>(i), t);
  }
  return p;
}

namespace {

FeatureMatrix fgsm_loop(const InjectionObjective& obj, std::size_t rows, std::size_t cols, double step,
                        std::size_t steps, double lo, double hi, std::vector<double>* trace) {
  const auto [flo, fhi] = float_safe_range(lo, hi);
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  clamp_inplace(x, flo, fhi);
  if (rows == 0) return to_float(x);
  Matrix g;
  for (std::size_t t = 0; t < steps; ++t) {
    const double loss = obj.evaluate(x, &g);
    if (trace) trace->push_back(loss);
    x += step * g.array().sign().matrix();
    clamp_inplace(x, flo, fhi);
  }
  if (trace && steps > 0) trace->push_back(obj.evaluate(x, nullptr));
  return to_float(x);
}

}  // namespace

FeatureMatrix fgsm_features(const TrainedModel& model, const GraphBundle& host, const InjectionPatch& topology,
                            std::vector<NodeId> rows, std::vector<std::uint32_t> labels, double step_size,
                            std::size_t steps, double feature_min, double feature_max) {
  InjectionObjective obj(model, host, topology, std::move(rows), std::move(labels), InjectionLoss::CrossEntropy);
  return fgsm_loop(obj, topology.num_injected, host.num_features(), step_size, steps, feature_min, feature_max,
                   nullptr);
}

// ---------------------------------------------------------------------------
// Injection attacks

AttackResult inject_rnd(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Injection, "RND");
  const auto clean = surrogate_predictions(ctx);
  Rng topo(mix_seed(ctx.seed, "topology"));
  AttackResult r;
  r.method = "RND";
  r.scenario = Scenario::Injection;
  r.patch = random_injection_topology(ctx.budget.max_injected_nodes, edges_per_node(ctx), ctx.targets,
                                      ctx.host.num_features(), topo);
  Rng feat(mix_seed(ctx.seed, "features"));
  const auto [lo, hi] = float_safe_range(ctx.budget.feature_min, ctx.budget.feature_max);
  for (Eigen::Index i = 0; i < r.patch.features.size(); ++i) {
    r.patch.features.data()[i] = static_cast<float>(std::clamp(params.rnd_sigma * feat.normal(), lo, hi));
  }
  return finalize(ctx, std::move(r), clean);
}

AttackResult inject_fgsm(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Injection, "FGSM");
  const auto clean = surrogate_predictions(ctx);
  Rng topo(mix_seed(ctx.seed, "topology"));
  AttackResult r;
  r.method = "FGSM";
  r.scenario = Scenario::Injection;
  r.patch = random_injection_topology(ctx.budget.max_injected_nodes, edges_per_node(ctx), ctx.targets,
                                      ctx.host.num_features(), topo);
  InjectionObjective obj(*ctx.surrogate, ctx.host, r.patch, ctx.targets, gather(clean, ctx.targets),
                         InjectionLoss::CrossEntropy);
  r.patch.features = fgsm_loop(obj, r.patch.num_injected, ctx.host.num_features(), params.step_size,
                               params.iterations, ctx.budget.feature_min, ctx.budget.feature_max, &r.loss_trace);
  r.iterations_used = params.iterations;
  return finalize(ctx, std::move(r), clean);
}

AttackResult inject_pgd(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Injection, "PGD");
  const auto clean = surrogate_predictions(ctx);
  Rng topo(mix_seed(ctx.seed, "topology"));
  AttackResult r;
  r.method = "PGD";
  r.scenario = Scenario::Injection;
  r.patch = random_injection_topology(ctx.budget.max_injected_nodes, edges_per_node(ctx), ctx.targets,
                                      ctx.host.num_features(), topo);
  const auto [lo, hi] = float_safe_range(ctx.budget.feature_min, ctx.budget.feature_max);
  Rng init(mix_seed(ctx.seed, "features"));
  Matrix x(static_cast<Eigen::Index>(r.patch.num_injected), static_cast<Eigen::Index>(ctx.host.num_features()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = init.uniform(lo, hi);

  if (r.patch.num_injected > 0 && params.iterations > 0) {
    InjectionObjective obj(*ctx.surrogate, ctx.host, r.patch, ctx.targets, gather(clean, ctx.targets),
                           InjectionLoss::CrossEntropy);
    Matrix g, g_next;
    double loss = obj.evaluate(x, &g);
    double eta = params.step_size;
    r.loss_trace.push_back(loss);
    // Normalized ascent with step halving: a candidate that lowers the loss is
    // rejected, so the accepted trace is non-decreasing.
    for (std::size_t t = 0; t < params.iterations; ++t) {
      const double gmax = g.cwiseAbs().maxCoeff();
      if (!(gmax > 0.0) || eta < 1e-12) break;
      Matrix cand = x + (eta / gmax) * g;
      clamp_inplace(cand, lo, hi);
      const double cand_loss = obj.evaluate(cand, &g_next);
      if (cand_loss >= loss) {
        x = std::move(cand);
        loss = cand_loss;
        std::swap(g, g_next);
      } else {
        eta *= 0.5;
      }
      r.loss_trace.push_back(loss);
      ++r.iterations_used;
    }
  }
  r.patch.features = to_float(x);
  return finalize(ctx, std::move(r), clean);
}

AttackResult inject_speit(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Injection, "SPEIT");
  const auto clean = surrogate_predictions(ctx);
  const std::size_t n = ctx.budget.max_injected_nodes;
  const std::size_t cap = ctx.budget.max_edges_per_injected;
  AttackResult r;
  r.method = "SPEIT";
  r.scenario = Scenario::Injection;
  InjectionPatch& p = r.patch;
  p.num_injected = n;
  p.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ctx.host.num_features()));

  // A chain through all injected nodes, counted against each node's edge cap.
  std::vector<std::size_t> used(n, 0);
  if (cap >= 2 || n <= 2) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      p.internal_edges.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1));
      ++used[i];
      ++used[i + 1];
    }
  }
  // Groups of consecutive injected nodes take consecutive, disjoint blocks of
  // a shuffled target order; targets are reused only once all are covered.
  std::vector<NodeId> order = ctx.targets;
  Rng rng(mix_seed(ctx.seed, "topology"));
  rng.shuffle(order);
  const std::size_t group = params.speit_group > 0 ? params.speit_group : std::max<std::size_t>(1, (n + 7) / 8);
  std::size_t cursor = 0;
  for (std::size_t start = 0; start < n; start += group) {
    for (std::size_t i = start; i < std::min(n, start + group); ++i) {
      std::size_t want = cap > used[i] ? cap - used[i] : 0;
      if (used[i] == 0) want = std::max<std::size_t>(want, 1);
      want = std::min(want, order.size());
      std::set<NodeId> mine;
      for (std::size_t tries = 0; mine.size() < want && tries < 2 * order.size(); ++tries) {
        const NodeId t = order[cursor % order.size()];
        ++cursor;
        mine.insert(t);
      }
      for (NodeId t : mine) p.target_edges.emplace_back(static_cast<std::uint32_t>(i), t);
    }
  }
  std::sort(p.target_edges.begin(), p.target_edges.end());

  if (n > 0 && params.iterations > 0) {
    InjectionObjective obj(*ctx.surrogate, ctx.host, p, ctx.targets, gather(clean, ctx.targets),
                           InjectionLoss::CrossEntropy);
    const auto [lo, hi] = float_safe_range(ctx.budget.feature_min, ctx.budget.feature_max);
    Matrix x = Matrix::Zero(p.features.rows(), p.features.cols());
    clamp_inplace(x, lo, hi);
    std::deque<Matrix> signs;
    Matrix g;
    for (std::size_t t = 0; t < params.iterations; ++t) {
      r.loss_trace.push_back(obj.evaluate(x, &g));
      signs.push_back(g.array().sign().matrix());
      if (signs.size() > std::max<std::size_t>(1, params.speit_window)) signs.pop_front();
      Matrix avg = Matrix::Zero(x.rows(), x.cols());
      for (const auto& s : signs) avg += s;
      avg /= static_cast<double>(signs.size());
      x += params.step_size * avg;
      clamp_inplace(x, lo, hi);
    }
    r.loss_trace.push_back(obj.evaluate(x, nullptr));
    r.iterations_used = params.iterations;
    p.features = to_float(x);
  }
  return finalize(ctx, std::move(r), clean);
}

AttackResult inject_tdgia(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Injection, "TDGIA");
  const auto clean = surrogate_predictions(ctx);
  const std::size_t n_total = ctx.budget.max_injected_nodes;
  const std::size_t e = edges_per_node(ctx);
  const std::size_t batch =
      params.tdgia_batch > 0 ? params.tdgia_batch : std::max<std::size_t>(1, (n_total + 3) / 4);
  const double lambda = params.tdgia_lambda;
  const auto [lo, hi] = float_safe_range(ctx.budget.feature_min, ctx.budget.feature_max);
  const std::size_t dim = ctx.host.num_features();
  const auto target_labels = gather(clean, ctx.targets);

  AttackResult r;
  r.method = "TDGIA";
  r.scenario = Scenario::Injection;
  InjectionPatch& p = r.patch;
  p.features.resize(0, static_cast<Eigen::Index>(dim));
  Matrix x(0, static_cast<Eigen::Index>(dim));
  std::unordered_set<NodeId> attached;

  while (p.num_injected < n_total) {
    const std::size_t b = std::min(batch, n_total - p.num_injected);
    // Vulnerability on the current injected graph.
    InjectionPatch current = p;
    current.features = to_float(x);
    const GraphBundle g_now = apply_injection(ctx.host, current);
    const Matrix logits = forward_logits(*ctx.surrogate, build_operator(ctx.surrogate->spec.arch, g_now),
                                         to_double(g_now.features()));
    struct Scored {
      double score;
      NodeId v;
    };
    auto score_of = [&](NodeId v) {
      const Eigen::RowVectorXd z = logits.row(v);
      const double m = z.maxCoeff();
      const double maxprob = 1.0 / (z.array() - m).exp().sum();
      return lambda / (1.0 + static_cast<double>(g_now.degree(v))) + (1.0 - lambda) * (1.0 - maxprob);
    };
    std::vector<Scored> fresh, seen;
    for (NodeId v : ctx.targets) (attached.count(v) ? seen : fresh).push_back({score_of(v), v});
    auto by_score = [](const Scored& a, const Scored& c) { return a.score > c.score || (a.score == c.score && a.v < c.v); };
    std::sort(fresh.begin(), fresh.end(), by_score);
    std::sort(seen.begin(), seen.end(), by_score);
    std::vector<NodeId> ranked;
    for (const auto& s : fresh) ranked.push_back(s.v);
    for (const auto& s : seen) ranked.push_back(s.v);

    std::size_t cursor = 0;
    for (std::size_t k = 0; k < b; ++k) {
      const auto idx = static_cast<std::uint32_t>(p.num_injected + k);
      std::set<NodeId> mine;
      while (mine.size() < e) {
        mine.insert(ranked[cursor % ranked.size()]);
        ++cursor;
      }
      for (NodeId t : mine) {
        p.target_edges.emplace_back(idx, t);
        attached.insert(t);
      }
    }
    p.num_injected += b;
    x.conservativeResize(static_cast<Eigen::Index>(p.num_injected), Eigen::NoChange);
    x.bottomRows(static_cast<Eigen::Index>(b)).setZero();
    clamp_inplace(x, lo, hi);

    InjectionObjective obj(*ctx.surrogate, ctx.host, p, ctx.targets, target_labels, InjectionLoss::Margin);
    Matrix g;
    for (std::size_t t = 0; t < params.iterations; ++t) {
      r.loss_trace.push_back(obj.evaluate(x, &g));
      x -= params.step_size * g.array().sign().matrix();
      clamp_inplace(x, lo, hi);
      ++r.iterations_used;
    }
  }
  p.features = to_float(x);
  return finalize(ctx, std::move(r), clean);
}

// ---------------------------------------------------------------------------
// Modification attacks

namespace {

// Edge state of the host plus edits so far; refuses to touch a pair twice.
class EditTracker {
 public:
  explicit EditTracker(const GraphBundle& g) : g_(g) {}

  bool present(NodeId u, NodeId v) const {
    const bool flipped = touched_.count(pair_key(u, v)) > 0;
    return g_.has_edge(u, v) != flipped;
  }
  bool touched(NodeId u, NodeId v) const { return touched_.count(pair_key(u, v)) > 0; }
  void flip(NodeId u, NodeId v) {
    edits_.push_back({present(u, v) ? EditKind::Remove : EditKind::Add, std::min(u, v), std::max(u, v)});
    touched_.insert(pair_key(u, v));
  }
  std::size_t size() const { return edits_.size(); }
  std::vector<EdgeEdit> take() { return std::move(edits_); }

 private:
  const GraphBundle& g_;
  std::unordered_set<std::uint64_t> touched_;
  std::vector<EdgeEdit> edits_;
};

// Random flips of target-incident pairs. Returns false if the budget could
// not be spent.
bool random_flips(const AttackContext& ctx, EditTracker& tracker, std::size_t budget, Rng& rng) {
  const std::size_t n = ctx.host.num_nodes();
  if (n < 2) return budget == 0;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 50 * budget + 1000;
  while (tracker.size() < budget && attempts++ < max_attempts) {
    const NodeId t = ctx.targets[rng.uniform_index(ctx.targets.size())];
    const auto u = static_cast<NodeId>(rng.uniform_index(n));
    if (u == t || tracker.touched(t, u)) continue;
    tracker.flip(t, u);
  }
  return tracker.size() >= budget;
}

}  // namespace

AttackResult modify_heuristic(const AttackContext& ctx, AttackMethod method) {
  if (method != AttackMethod::ModRnd && method != AttackMethod::ModDice && method != AttackMethod::ModFlip) {
    throw Error(ErrorCode::InvalidArgument, "modify_heuristic handles RND, DICE and FLIP");
  }
  require_scenario(ctx, Scenario::Modification, to_string(method));
  const auto clean = surrogate_predictions(ctx);
  const GraphBundle& g = ctx.host;
  const std::size_t budget = ctx.budget.max_edits(g.num_edges());
  EditTracker tracker(g);
  Rng rng(mix_seed(ctx.seed, to_string(method)));
  AttackResult r;
  r.method = std::string(to_string(method));
  r.scenario = Scenario::Modification;

  if (method == AttackMethod::ModRnd) {
    r.partial = !random_flips(ctx, tracker, budget, rng);
  } else if (method == AttackMethod::ModDice) {
    // Visible labels where the attacker has them, surrogate predictions elsewhere.
    std::vector<std::uint32_t> cls = clean;
    for (NodeId v : ctx.labeled) cls[v] = g.labels()[v];
    std::vector<std::pair<NodeId, NodeId>> internal;
    {
      std::unordered_set<std::uint64_t> seen;
      for (NodeId t : ctx.targets) {
        for (NodeId u : g.neighbors(t)) {
          if (cls[u] == cls[t] && seen.insert(pair_key(t, u)).second) internal.emplace_back(t, u);
        }
      }
    }
    rng.shuffle(internal);
    std::size_t next_internal = 0;
    auto try_delete = [&] {
      while (next_internal < internal.size()) {
        auto [t, u] = internal[next_internal++];
        if (!tracker.touched(t, u)) {
          tracker.flip(t, u);
          return true;
        }
      }
      return false;
    };
    auto try_add = [&] {
      for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
        const NodeId t = ctx.targets[rng.uniform_index(ctx.targets.size())];
        const auto u = static_cast<NodeId>(rng.uniform_index(g.num_nodes()));
        if (u == t || cls[u] == cls[t] || tracker.touched(t, u) || tracker.present(t, u)) continue;
        tracker.flip(t, u);
        return true;
      }
      return false;
    };
    while (tracker.size() < budget) {
      const bool remove_first = rng.bernoulli(0.5);
      const bool ok = remove_first ? (try_delete() || try_add()) : (try_add() || try_delete());
      if (!ok) {
        r.partial = true;
        break;
      }
    }
  } else {
    const auto deg = degrees(g);
    std::vector<NodeId> order = ctx.targets;
    std::sort(order.begin(), order.end(),
              [&](NodeId a, NodeId b) { return deg[a] < deg[b] || (deg[a] == deg[b] && a < b); });
    for (NodeId t : order) {
      if (tracker.size() >= budget) break;
      for (NodeId u : g.neighbors(t)) {
        if (tracker.size() >= budget) break;
        if (deg[u] > deg[t] && !tracker.touched(t, u)) tracker.flip(t, u);
      }
    }
    r.partial = tracker.size() < budget;
  }
  r.edits = tracker.take();
  return finalize(ctx, std::move(r), clean);
}

Matrix fga_adjacency_gradient(const TrainedModel& surrogate, const GraphBundle& g, std::span<const NodeId> rows,
                              std::span<const std::uint32_t> labels) {
  const Arch a = surrogate.spec.arch;
  if (a == Arch::GIN || a == Arch::SAGE) {
    throw Error(ErrorCode::GradientUnavailable, "adjacency gradient needs a GCN-normalized surrogate");
  }
  const std::size_t n = g.num_nodes();
  const OperatorPtr op = gcn_normalize(g);
  Tape tape(false);
  ForwardTrace trace;
  // Features are tracked so that every propagation output carries a gradient.
  Var x = tape.input(to_double(g.features()), true);
  ModelBinding b = bind(tape, surrogate, false);
  Var logits = forward_logits(tape, surrogate, b, op, x, &trace);
  Var loss = tape.nll_loss(tape.log_softmax(logits), rows, labels);
  tape.backward(loss);

  // dL/dÂ = Σ_l dY_l M_lᵀ over propagations Y_l = Â M_l.
  Matrix G = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& [in, out] : trace.propagations) {
    const Matrix& gy = tape.grad(out);
    if (gy.size() == 0) continue;
    G.noalias() += gy * tape.value(in).transpose();
  }

  std::vector<double> d(n), s(n);
  for (NodeId v = 0; v < n; ++v) {
    d[v] = static_cast<double>(g.degree(v) + 1);
    s[v] = 1.0 / std::sqrt(d[v]);
  }
  // r_u = Σ_j (G_uj + G_ju) Â_uj over the closed neighborhood.
  std::vector<double> r(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    double acc = 2.0 * G(u, u) * s[u] * s[u];
    for (NodeId j : g.neighbors(u)) acc += (G(u, j) + G(j, u)) * s[u] * s[j];
    r[u] = acc;
  }
  Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u; v < n; ++v) {
      const double val =
          u == v ? 0.0 : s[u] * s[v] * (G(u, v) + G(v, u)) - r[u] / (2.0 * d[u]) - r[v] / (2.0 * d[v]);
      out(u, v) = val;
      out(v, u) = val;
    }
  }
  return out;
}

AttackResult modify_fga(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Modification, "FGA");
  const std::size_t n = ctx.host.num_nodes();
  if (n > params.fga_max_nodes) {
    throw Error(ErrorCode::TooLargeForDense,
                "FGA needs a dense " + std::to_string(n) + "^2 gradient (limit " + std::to_string(params.fga_max_nodes) +
                    " nodes)");
  }
  const auto clean = surrogate_predictions(ctx);
  const auto labels = gather(clean, ctx.targets);
  const std::size_t budget = ctx.budget.max_edits(ctx.host.num_edges());
  const std::size_t interval = std::max<std::size_t>(1, params.fga_interval);

  AttackResult r;
  r.method = "FGA";
  r.scenario = Scenario::Modification;
  EditTracker tracker(ctx.host);
  GraphBundle current = ctx.host;
  struct Candidate {
    double score;
    NodeId u, v;
  };
  while (tracker.size() < budget) {
    const Matrix grad = fga_adjacency_gradient(*ctx.surrogate, current, ctx.targets, labels);
    std::vector<Candidate> cands;
    cands.reserve(n * (n - 1) / 2);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (tracker.touched(u, v)) continue;
        const double dir = tracker.present(u, v) ? -1.0 : 1.0;
        cands.push_back({dir * grad(u, v), u, v});
      }
    }
    if (cands.empty()) {
      r.partial = true;
      break;
    }
    const std::size_t take = std::min({interval, budget - tracker.size(), cands.size()});
    auto better = [](const Candidate& a, const Candidate& b) {
      return a.score > b.score || (a.score == b.score && (a.u < b.u || (a.u == b.u && a.v < b.v)));
    };
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take), cands.end(), better);
    std::vector<EdgeEdit> round;
    for (std::size_t i = 0; i < take; ++i) {
      const bool was = tracker.present(cands[i].u, cands[i].v);
      tracker.flip(cands[i].u, cands[i].v);
      round.push_back({was ? EditKind::Remove : EditKind::Add, cands[i].u, cands[i].v});
    }
    current = apply_edits(current, round);
    ++r.iterations_used;
  }
  r.edits = tracker.take();
  return finalize(ctx, std::move(r), clean);
}

AttackResult modify_pgd(const AttackContext& ctx, const AttackParams& params) {
  require_scenario(ctx, Scenario::Modification, "PGD-mod");
  const auto clean = surrogate_predictions(ctx);
  const auto labels = gather(clean, ctx.targets);
  AttackResult r;
  r.method = "PGD-mod";
  r.scenario = Scenario::Modification;
  r.feature_perturbation = true;
  EditTracker tracker(ctx.host);
  Rng rng(mix_seed(ctx.seed, "PGD-mod"));
  r.partial = !random_flips(ctx, tracker, ctx.budget.max_edits(ctx.host.num_edges()), rng);
  r.edits = tracker.take();

  const GraphBundle structural = apply_edits(ctx.host, r.edits);
  const OperatorPtr op = build_operator(ctx.surrogate->spec.arch, structural);
  std::vector<NodeId> rows = ctx.targets;
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  const auto [lo, hi] = float_safe_range(ctx.budget.feature_min, ctx.budget.feature_max);

  Matrix x = to_double(structural.features());
  auto objective = [&](const Matrix& feats, Matrix* grad) {
    Tape tape(false);
    Var xv = tape.input(feats, grad != nullptr);
    Var logits = forward_logits(tape, *ctx.surrogate, bind(tape, *ctx.surrogate, false), op, xv);
    Var loss = tape.nll_loss(tape.log_softmax(logits), ctx.targets, labels);
    if (grad) {
      tape.backward(loss);
      grad->resize(static_cast<Eigen::Index>(rows.size()), feats.cols());
      const Matrix& full = tape.grad(xv);
      for (std::size_t i = 0; i < rows.size(); ++i) grad->row(static_cast<Eigen::Index>(i)) = full.row(rows[i]);
    }
    return tape.value(loss)(0, 0);
  };

  if (params.step_size > 0.0 && params.iterations > 0) {
    Matrix g, g_next;
    double loss = objective(x, &g);
    r.loss_trace.push_back(loss);
    double eta = params.step_size;
    for (std::size_t t = 0; t < params.iterations; ++t) {
      const double gmax = g.cwiseAbs().maxCoeff();
      if (!(gmax > 0.0) || eta < 1e-12) break;
      Matrix cand = x;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto row = cand.row(rows[i]);
        row = (row + (eta / gmax) * g.row(static_cast<Eigen::Index>(i))).cwiseMax(lo).cwiseMin(hi);
      }
      const double cand_loss = objective(cand, &g_next);
      if (cand_loss >= loss) {
        x = std::move(cand);
        loss = cand_loss;
        std::swap(g, g_next);
      } else {
        eta *= 0.5;
      }
      r.loss_trace.push_back(loss);
      ++r.iterations_used;
    }
    r.feature_nodes = rows;
    r.feature_values.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      r.feature_values.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]).cwiseMax(lo).cwiseMin(hi).cast<float>();
    }
  } else {
    r.loss_trace.push_back(objective(x, nullptr));
  }
  return finalize(ctx, std::move(r), clean);
}

AttackResult run_attack(AttackMethod method, const AttackContext& ctx, const AttackParams& params) {
  switch (method) {
    case AttackMethod::InjectRnd: return inject_rnd(ctx, params);
    case AttackMethod::InjectFgsm: return inject_fgsm(ctx, params);
    case AttackMethod::InjectPgd: return inject_pgd(ctx, params);
    case AttackMethod::InjectSpeit: return inject_speit(ctx, params);
    case AttackMethod::InjectTdgia: return inject_tdgia(ctx, params);
    case AttackMethod::ModRnd:
    case AttackMethod::ModDice:
    case AttackMethod::ModFlip: return modify_heuristic(ctx, method);
    case AttackMethod::ModFga: return modify_fga(ctx, params);
    case AttackMethod::ModPgd: return modify_pgd(ctx, params);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown attack method");
}

// ---------------------------------------------------------------------------
// GRBA1 artifact

void save_attack(const AttackResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  json edits = json::array();
  for (const auto& e : r.edits) edits.push_back({e.kind == EditKind::Add ? "add" : "remove", e.u, e.v});
  json doc = {
      {"format", "GRBA1"},
      {"method", r.method},
      {"scenario", to_string(r.scenario)},
      {"edits", edits},
      {"num_injected", r.patch.num_injected},
      {"target_edges", r.patch.target_edges},
      {"internal_edges", r.patch.internal_edges},
      {"injected_feature_shape", {r.patch.features.rows(), r.patch.features.cols()}},
      {"feature_perturbation", r.feature_perturbation},
      {"feature_nodes", r.feature_nodes},
      {"feature_value_shape", {r.feature_values.rows(), r.feature_values.cols()}},
      {"surrogate_accuracy_after", r.surrogate_accuracy_after},
      {"iterations_used", r.iterations_used},
      {"partial", r.partial},
      {"loss_trace", r.loss_trace},
  };
  io::write_text_file(dir / "attack.json", doc.dump(2) + "\n");
  std::vector<float> blob(r.patch.features.data(), r.patch.features.data() + r.patch.features.size());
  blob.insert(blob.end(), r.feature_values.data(), r.feature_values.data() + r.feature_values.size());
  io::write_f32_file(dir / "features.bin", blob);
}

AttackResult load_attack(const std::filesystem::path& dir) {
  AttackResult r;
  std::vector<float> blob;
  try {
    const json doc = json::parse(io::read_text_file(dir / "attack.json"));
    if (doc.at("format") != "GRBA1") throw Error(ErrorCode::FormatError, "not a GRBA1 attack artifact");
    r.method = doc.at("method").get<std::string>();
    r.scenario = parse_scenario(doc.at("scenario").get<std::string>());
    for (const auto& e : doc.at("edits")) {
      r.edits.push_back({e.at(0) == "add" ? EditKind::Add : EditKind::Remove, e.at(1).get<NodeId>(),
                         e.at(2).get<NodeId>()});
    }
    r.patch.num_injected = doc.at("num_injected").get<std::size_t>();
    r.patch.target_edges = doc.at("target_edges").get<std::vector<std::pair<std::uint32_t, NodeId>>>();
    r.patch.internal_edges = doc.at("internal_edges").get<std::vector<std::pair<std::uint32_t, std::uint32_t>>>();
    r.feature_perturbation = doc.at("feature_perturbation").get<bool>();
    r.feature_nodes = doc.at("feature_nodes").get<std::vector<NodeId>>();
    r.surrogate_accuracy_after = doc.at("surrogate_accuracy_after").get<double>();
    r.iterations_used = doc.at("iterations_used").get<std::size_t>();
    r.partial = doc.at("partial").get<bool>();
    r.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
    const auto ishape = doc.at("injected_feature_shape").get<std::array<Eigen::Index, 2>>();
    const auto fshape = doc.at("feature_value_shape").get<std::array<Eigen::Index, 2>>();
    blob = io::read_f32_file(dir / "features.bin");
    const auto need = static_cast<std::size_t>(ishape[0] * ishape[1] + fshape[0] * fshape[1]);
    if (blob.size() != need) throw Error(ErrorCode::ShapeMismatch, "attack feature blob size");
    r.patch.features = Eigen::Map<const FeatureMatrix>(blob.data(), ishape[0], ishape[1]);
    r.feature_values = Eigen::Map<const FeatureMatrix>(blob.data() + ishape[0] * ishape[1], fshape[0], fshape[1]);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "attack.json: " + std::string(e.what()));
  }
  return r;
}

}  // namespace grb
