#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "grb/data_prep.hpp"
#include "grb/graph.hpp"
#include "grb/models.hpp"

namespace grb {

enum class AttackMethod {
  // injection
  InjectRnd,
  InjectFgsm,
  InjectPgd,
  InjectSpeit,
  InjectTdgia,
  // modification
  ModRnd,
  ModDice,
  ModFlip,
  ModFga,
  ModPgd,
};

std::string_view to_string(AttackMethod m);  // e.g. "FGSM", "DICE", "PGD-mod"
AttackMethod parse_attack(std::string_view text);
Scenario scenario_of(AttackMethod m);
/// Whether the method may change feature rows of existing nodes.
bool perturbs_features(AttackMethod m);

/// What the attacker sees. Built by make_attack_context, which replaces the
/// labels of every node outside `labeled` with the sentinel.
struct AttackContext {
  std::shared_ptr<const TrainedModel> surrogate;
  GraphBundle host;
  std::vector<NodeId> targets;
  std::vector<NodeId> labeled;  // train/val nodes whose labels are visible
  AttackBudget budget;
  std::uint64_t seed = 0;
};

AttackContext make_attack_context(std::shared_ptr<const TrainedModel> surrogate, const GraphBundle& g,
                                  const DifficultySplit& split, Difficulty difficulty, const AttackBudget& budget,
                                  std::uint64_t seed);

struct AttackParams {
  double step_size = 0.01;
  std::size_t iterations = 100;
  double rnd_sigma = 0.1;
  double tdgia_lambda = 0.5;
  std::size_t tdgia_batch = 0;    // 0: ceil(N_n / 4)
  std::size_t speit_group = 0;    // 0: ceil(N_n / 8)
  std::size_t speit_window = 5;
  std::size_t fga_interval = 10;
  std::size_t fga_max_nodes = 20000;
};

struct AttackResult {
  std::string method;
  Scenario scenario = Scenario::Injection;
  std::vector<EdgeEdit> edits;  // modification
  InjectionPatch patch;         // injection
  // Feature rows replaced by the attack (modification methods that declare it).
  bool feature_perturbation = false;
  std::vector<NodeId> feature_nodes;
  FeatureMatrix feature_values;
  double surrogate_accuracy_after = 1.0;
  std::size_t iterations_used = 0;
  bool partial = false;  // budget could not be spent in full
  std::vector<double> loss_trace;
};

/// Violations of the budget, empty when the result is admissible. Never
/// throws.
std::vector<std::string> check_budget(const GraphBundle& original, const AttackResult& result,
                                      const AttackBudget& budget);

AttackResult inject_rnd(const AttackContext& ctx, const AttackParams& params = {});
AttackResult inject_fgsm(const AttackContext& ctx, const AttackParams& params = {});
AttackResult inject_pgd(const AttackContext& ctx, const AttackParams& params = {});
AttackResult inject_speit(const AttackContext& ctx, const AttackParams& params = {});
AttackResult inject_tdgia(const AttackContext& ctx, const AttackParams& params = {});
AttackResult modify_heuristic(const AttackContext& ctx, AttackMethod method);
AttackResult modify_fga(const AttackContext& ctx, const AttackParams& params = {});
AttackResult modify_pgd(const AttackContext& ctx, const AttackParams& params = {});

AttackResult run_attack(AttackMethod method, const AttackContext& ctx, const AttackParams& params = {});

/// The attacked graph: edits and feature rows applied, or nodes injected.
GraphBundle apply_attack(const GraphBundle& g, const AttackResult& result);

/// Dense dL/dA for a GCN surrogate, where A is the raw symmetric adjacency and
/// each (u, v) entry moves together with (v, u). L is the mean cross-entropy
/// on `rows` w.r.t. `labels`. The diagonal is zero.
Matrix fga_adjacency_gradient(const TrainedModel& surrogate, const GraphBundle& g, std::span<const NodeId> rows,
                              std::span<const std::uint32_t> labels);

enum class InjectionLoss { CrossEntropy, Margin };

/// Loss of a fixed model on a graph with injected nodes, as a function of the
/// injected feature rows. Topology is fixed at construction.
class InjectionObjective {
 public:
  InjectionObjective(const TrainedModel& model, const GraphBundle& host, const InjectionPatch& topology,
                     std::vector<NodeId> rows, std::vector<std::uint32_t> labels, InjectionLoss loss);

  /// Loss value; fills `grad` (num_injected x D) when non-null.
  double evaluate(const Matrix& injected, Matrix* grad) const;
  /// Logits of the host nodes.
  Matrix host_logits(const Matrix& injected) const;

 private:
  const TrainedModel& model_;
  OperatorPtr op_;
  Matrix host_features_;
  std::vector<NodeId> rows_;
  std::vector<std::uint32_t> labels_;
  InjectionLoss loss_;
  std::size_t num_host_;
};

/// Float bounds that stay inside [lo, hi] after a double -> float cast.
std::pair<double, double> float_safe_range(double lo, double hi);

/// Iterative FGSM over injected features of a fixed topology: starts at zero
/// and takes `steps` sign steps that raise the cross-entropy on `rows`.
FeatureMatrix fgsm_features(const TrainedModel& model, const GraphBundle& host, const InjectionPatch& topology,
                            std::vector<NodeId> rows, std::vector<std::uint32_t> labels, double step_size,
                            std::size_t steps, double feature_min, double feature_max);

/// Random injection topology: each of n nodes links to min(edges, |targets|)
/// distinct targets drawn uniformly.
InjectionPatch random_injection_topology(std::size_t n, std::size_t edges, std::span<const NodeId> targets,
                                         std::size_t num_features, Rng& rng);

/// "GRBA1" artifact: <dir>/attack.json plus <dir>/features.bin.
void save_attack(const AttackResult& result, const std::filesystem::path& dir);
AttackResult load_attack(const std::filesystem::path& dir);

}  // namespace grb
