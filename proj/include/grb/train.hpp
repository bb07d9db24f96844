#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grb/data_prep.hpp"
#include "grb/graph.hpp"
#include "grb/models.hpp"

namespace grb {

struct TrainConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t max_epochs = 1000;
  std::size_t patience = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

/// FGSM injection during training. steps == 0 disables the attack.
struct AtConfig {
  std::size_t warmup_epochs = 10;
  double step_size = 0.01;
  std::size_t steps = 10;
  std::size_t injected_nodes = 20;
  std::size_t edges_per_node = 20;
  double feature_min = -1.0;
  double feature_max = 1.0;

  static AtConfig from_preset(const AtPreset& p);
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

/// One JSON object per line: {"epoch":..,"train_loss":..,"val_acc":..}.
std::string to_jsonl(const std::vector<EpochLog>& log);

class Adam {
 public:
  Adam(const TrainConfig& cfg, const std::vector<Parameter>& params);
  void step(std::vector<Parameter>& params, const std::vector<Matrix>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

/// Cross-entropy on train nodes over the subgraph induced by train ∪ val.
/// Returns the parameters with the best validation accuracy.
TrainedModel train(const ModelSpec& spec, const GraphBundle& g, const DifficultySplit& split,
                   const TrainConfig& cfg, std::vector<EpochLog>* log = nullptr);

/// As train, but after warm-up every epoch first injects FGSM nodes against
/// uniformly drawn train nodes (true labels, current weights) and then takes
/// one optimizer step on the injected graph. Validation uses the clean graph.
TrainedModel adversarial_train(const ModelSpec& spec, const GraphBundle& g, const DifficultySplit& split,
                               const TrainConfig& cfg, const AtConfig& at, std::vector<EpochLog>* log = nullptr);

}  // namespace grb
