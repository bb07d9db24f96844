#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grb/attacks.hpp"
#include "grb/data_prep.hpp"
#include "grb/leaderboard.hpp"
#include "grb/models.hpp"
#include "grb/train.hpp"

namespace grb {

/// One model to train (or load) and evaluate.
struct ModelEntry {
  std::string id;  // defaults to spec id plus "+AT" / "+SVD"
  ModelSpec spec;
  bool adversarial = false;
  std::size_t svd_rank = 0;
  std::string checkpoint;  // load instead of training

  std::string display_id() const;
};

/// Everything a run needs. Read from JSON, then overridden by flags; the
/// effective config is written next to every output.
struct RunConfig {
  std::string dataset;   // synthetic preset name, bundle directory or prep output
  std::string data_dir;  // root for bare dataset names; default $GRB_DATA_DIR
  std::string preset;    // budget preset; default: the dataset name when one exists
  std::optional<Scenario> scenario;
  std::vector<ModelEntry> models;
  ModelEntry surrogate;
  std::vector<AttackSpec> attacks;
  BudgetOverride budget;
  double edge_ratio = 0.05;
  Difficulty difficulty = Difficulty::Full;  // single attack runs
  std::uint64_t seed = 0;
  std::size_t repeats = 10;
  std::size_t jobs = 0;
  TrainConfig train;
  std::optional<AtConfig> at;  // default: the dataset's AT preset
  std::string out = "grb-out";

  /// Throws InvalidArgument when attack scenarios disagree or ids clash.
  void validate() const;
};

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

/// Entry point behind the grb executable. argv[0] is the program name.
/// Returns 0 on success, 1 on usage errors, 2 on validation errors and 3 on
/// runtime failures. Diagnostics go to stderr.
int run_command(const std::vector<std::string>& argv);

}  // namespace grb
