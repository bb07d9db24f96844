#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "grb/attacks.hpp"
#include "grb/data_prep.hpp"
#include "grb/graph.hpp"
#include "grb/models.hpp"

namespace grb {

inline constexpr std::string_view kNoAttack = "W/O Attack";

/// A model under evaluation, optionally behind the low-rank preprocessing.
struct Defense {
  std::string id;
  std::shared_ptr<const TrainedModel> model;
  std::size_t svd_rank = 0;  // 0: no preprocessing
};

/// Predictions of a defense on a (possibly attacked) graph.
std::vector<std::uint32_t> defend_predict(const Defense& d, const GraphBundle& g);

struct AttackSpec {
  std::string id;  // defaults to the method name
  AttackMethod method = AttackMethod::InjectFgsm;
  AttackParams params;
};

struct MatrixConfig {
  std::string preset;  // dataset name for budget_preset; empty: overrides only
  double edge_ratio = 0.05;
  std::size_t repeats = 10;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 0;  // 0: hardware concurrency
  BudgetOverride overrides;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;
  friend bool operator==(const Stat&, const Stat&) = default;
};

struct LeaderboardCell {
  std::string attack;
  std::string defense;
  Difficulty difficulty = Difficulty::Full;
  std::vector<double> accuracies;  // one per repeat; empty when failed
  bool failed = false;
  std::string error;

  Stat stat() const;
  friend bool operator==(const LeaderboardCell&, const LeaderboardCell&) = default;
};

/// Avg / Avg-3 / Weighted, each as mean±std over repeats.
struct ScoreSet {
  Stat avg;
  Stat avg3;  // Avg-3-Min for defenses, Avg-3-Max for attacks
  Stat weighted;
  friend bool operator==(const ScoreSet&, const ScoreSet&) = default;
};

struct Leaderboard {
  std::string dataset;
  std::size_t repeats = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::string> attacks;   // ranked, strongest first; W/O excluded
  std::vector<std::string> defenses;  // ranked, most robust first
  std::vector<LeaderboardCell> cells;
  // Indexed like the ranked lists, then by difficulty E, M, H, F.
  std::vector<std::array<ScoreSet, 4>> defense_scores;
  std::vector<std::array<ScoreSet, 4>> attack_scores;

  const LeaderboardCell* cell(std::string_view attack, std::string_view defense, Difficulty d) const;
  friend bool operator==(const Leaderboard&, const Leaderboard&) = default;
};

/// Recomputes scores and rankings from the cells. Failed cells are left out
/// of every score vector. Defenses rank by weighted accuracy at F
/// (descending), then Avg, then id; attacks by weighted score at F
/// (ascending), then Avg, then id.
void score_leaderboard(Leaderboard& lb);

/// Runs every attack at every difficulty `repeats` times against the
/// surrogate, then evaluates every defense on each attacked graph. Job seed =
/// mix(base_seed, attack id, difficulty, repeat).
Leaderboard run_matrix(const std::string& dataset, const GraphBundle& g, const DifficultySplit& split,
                       std::shared_ptr<const TrainedModel> surrogate, const std::vector<AttackSpec>& attacks,
                       const std::vector<Defense>& defenses, const MatrixConfig& cfg);

enum class OutputFormat { Csv, Json, Markdown };
OutputFormat parse_output_format(std::string_view text);
std::string emit_leaderboard(const Leaderboard& lb, OutputFormat format);
/// Parses the "GRBL1" JSON document.
Leaderboard parse_leaderboard_json(const std::string& text);

/// "xx.xx±y.yy" in percent.
std::string format_stat(const Stat& s);

}  // namespace grb
