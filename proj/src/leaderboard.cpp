#include "grb/leaderboard.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "grb/error.hpp"
#include "grb/metrics.hpp"
#include "grb/rng.hpp"
#include "grb/svd.hpp"

namespace grb {

using nlohmann::json;

std::vector<std::uint32_t> defend_predict(const Defense& d, const GraphBundle& g) {
  if (!d.model) throw Error(ErrorCode::InvalidArgument, "defense '" + d.id + "' has no model");
  if (d.svd_rank == 0) return predict(*d.model, g);
  const std::size_t k = std::min(d.svd_rank, g.num_nodes());
  const LowRankGraph low = svd_low_rank(g, k);
  return predict(*d.model, low.op, g.features());
}

Stat LeaderboardCell::stat() const {
  return {mean(accuracies), stddev(accuracies)};
}

const LeaderboardCell* Leaderboard::cell(std::string_view attack, std::string_view defense, Difficulty d) const {
  for (const auto& c : cells) {
    if (c.attack == attack && c.defense == defense && c.difficulty == d) return &c;
  }
  return nullptr;
}

namespace {

std::size_t difficulty_index(Difficulty d) { return static_cast<std::size_t>(d); }

Stat stat_of(const std::vector<double>& v) { return {mean(v), stddev(v)}; }

double repeat_value(const LeaderboardCell& c, std::size_t r) {
  return c.accuracies[std::min(r, c.accuracies.size() - 1)];
}

ScoreSet summarize(const std::vector<std::vector<double>>& per_repeat, Extreme side, SortOrder order) {
  std::vector<double> avg, avg3, weighted;
  for (const auto& scores : per_repeat) {
    if (scores.empty()) continue;
    avg.push_back(mean(scores));
    avg3.push_back(avg_k_extreme(scores, 3, side));
    weighted.push_back(weighted_score(scores, order));
  }
  return {stat_of(avg), stat_of(avg3), stat_of(weighted)};
}

}  // namespace

void score_leaderboard(Leaderboard& lb) {
  const std::size_t repeats = std::max<std::size_t>(1, lb.repeats);
  std::vector<std::string> attack_rows{std::string(kNoAttack)};
  attack_rows.insert(attack_rows.end(), lb.attacks.begin(), lb.attacks.end());

  auto usable = [&](std::string_view a, std::string_view d, Difficulty diff) -> const LeaderboardCell* {
    const LeaderboardCell* c = lb.cell(a, d, diff);
    return c && !c->failed && !c->accuracies.empty() ? c : nullptr;
  };

  std::vector<std::array<ScoreSet, 4>> def_scores(lb.defenses.size());
  for (std::size_t i = 0; i < lb.defenses.size(); ++i) {
    for (Difficulty diff : kAllDifficulties) {
      std::vector<std::vector<double>> per_repeat(repeats);
      for (std::size_t r = 0; r < repeats; ++r) {
        for (const auto& a : attack_rows) {
          if (const auto* c = usable(a, lb.defenses[i], diff)) per_repeat[r].push_back(repeat_value(*c, r));
        }
      }
      def_scores[i][difficulty_index(diff)] = summarize(per_repeat, Extreme::Min, SortOrder::Ascending);
    }
  }
  std::vector<std::array<ScoreSet, 4>> atk_scores(lb.attacks.size());
  for (std::size_t i = 0; i < lb.attacks.size(); ++i) {
    for (Difficulty diff : kAllDifficulties) {
      std::vector<std::vector<double>> per_repeat(repeats);
      for (std::size_t r = 0; r < repeats; ++r) {
        for (const auto& d : lb.defenses) {
          if (const auto* c = usable(lb.attacks[i], d, diff)) per_repeat[r].push_back(repeat_value(*c, r));
        }
      }
      atk_scores[i][difficulty_index(diff)] = summarize(per_repeat, Extreme::Max, SortOrder::Descending);
    }
  }

  const std::size_t f = difficulty_index(Difficulty::Full);
  std::vector<std::size_t> def_order(lb.defenses.size());
  std::iota(def_order.begin(), def_order.end(), 0);
  std::sort(def_order.begin(), def_order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = def_scores[a][f];
    const auto& sb = def_scores[b][f];
    if (sa.weighted.mean != sb.weighted.mean) return sa.weighted.mean > sb.weighted.mean;
    if (sa.avg.mean != sb.avg.mean) return sa.avg.mean > sb.avg.mean;
    return lb.defenses[a] < lb.defenses[b];
  });
  std::vector<std::size_t> atk_order(lb.attacks.size());
  std::iota(atk_order.begin(), atk_order.end(), 0);
  std::sort(atk_order.begin(), atk_order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = atk_scores[a][f];
    const auto& sb = atk_scores[b][f];
    if (sa.weighted.mean != sb.weighted.mean) return sa.weighted.mean < sb.weighted.mean;
    if (sa.avg.mean != sb.avg.mean) return sa.avg.mean < sb.avg.mean;
    return lb.attacks[a] < lb.attacks[b];
  });

  std::vector<std::string> defenses, attacks;
  lb.defense_scores.clear();
  lb.attack_scores.clear();
  for (std::size_t i : def_order) {
    defenses.push_back(lb.defenses[i]);
    lb.defense_scores.push_back(def_scores[i]);
  }
  for (std::size_t i : atk_order) {
    attacks.push_back(lb.attacks[i]);
    lb.attack_scores.push_back(atk_scores[i]);
  }
  lb.defenses = std::move(defenses);
  lb.attacks = std::move(attacks);
}

Leaderboard run_matrix(const std::string& dataset, const GraphBundle& g, const DifficultySplit& split,
                       std::shared_ptr<const TrainedModel> surrogate, const std::vector<AttackSpec>& attacks,
                       const std::vector<Defense>& defenses, const MatrixConfig& cfg) {
  if (cfg.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  {
    std::set<std::string> ids;
    for (const auto& a : attacks) {
      const std::string id = a.id.empty() ? std::string(to_string(a.method)) : a.id;
      if (id == kNoAttack || !ids.insert(id).second) throw Error(ErrorCode::InvalidArgument, "duplicate attack id " + id);
    }
    ids.clear();
    for (const auto& d : defenses) {
      if (!ids.insert(d.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate defense id " + d.id);
    }
  }
  Leaderboard lb;
  lb.dataset = dataset;
  lb.repeats = cfg.repeats;
  lb.base_seed = cfg.base_seed;
  for (const auto& d : defenses) lb.defenses.push_back(d.id);
  for (const auto& a : attacks) lb.attacks.push_back(a.id.empty() ? std::string(to_string(a.method)) : a.id);

  std::array<std::vector<NodeId>, 4> targets;
  for (Difficulty d : kAllDifficulties) targets[difficulty_index(d)] = split.test(d);

  // Clean row: inference is deterministic, so every repeat shares one value.
  for (const auto& def : defenses) {
    std::vector<std::uint32_t> preds;
    std::string error;
    try {
      preds = defend_predict(def, g);
    } catch (const std::exception& e) {
      error = e.what();
    }
    for (Difficulty d : kAllDifficulties) {
      LeaderboardCell c{std::string(kNoAttack), def.id, d, {}, !error.empty(), error};
      if (error.empty()) {
        try {
          c.accuracies.assign(cfg.repeats, subset_accuracy(preds, g.labels(), targets[difficulty_index(d)]));
        } catch (const std::exception& e) {
          c.failed = true;
          c.error = e.what();
        }
      }
      lb.cells.push_back(std::move(c));
    }
  }

  struct Job {
    std::size_t attack;
    Difficulty difficulty;
    std::size_t repeat;
    std::vector<double> accuracy;     // per defense
    std::vector<std::string> errors;  // per defense, empty on success
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < attacks.size(); ++a) {
    for (Difficulty d : kAllDifficulties) {
      for (std::size_t r = 0; r < cfg.repeats; ++r) {
        jobs.push_back({a, d, r, std::vector<double>(defenses.size(), 0.0), std::vector<std::string>(defenses.size())});
      }
    }
  }

  auto run_job = [&](Job& job) {
    const AttackSpec& spec = attacks[job.attack];
    const std::string& id = lb.attacks[job.attack];
    std::uint64_t seed = mix_seed(cfg.base_seed, id);
    seed = mix_seed(seed, static_cast<std::uint64_t>(job.difficulty));
    seed = mix_seed(seed, static_cast<std::uint64_t>(job.repeat));
    GraphBundle attacked;
    try {
      const AttackBudget budget =
          resolve_budget(cfg.preset, scenario_of(spec.method), job.difficulty, cfg.edge_ratio, cfg.overrides);
      const AttackContext ctx = make_attack_context(surrogate, g, split, job.difficulty, budget, seed);
      attacked = apply_attack(g, run_attack(spec.method, ctx, spec.params));
    } catch (const std::exception& e) {
      std::fill(job.errors.begin(), job.errors.end(), std::string(e.what()));
      return;
    }
    const auto& mask = targets[difficulty_index(job.difficulty)];
    for (std::size_t i = 0; i < defenses.size(); ++i) {
      try {
        job.accuracy[i] = subset_accuracy(defend_predict(defenses[i], attacked), attacked.labels(), mask);
      } catch (const std::exception& e) {
        job.errors[i] = e.what();
      }
    }
  };

  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(jobs.size(), cfg.jobs > 0 ? cfg.jobs : hw);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) run_job(jobs[i]);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Jobs are laid out attack-major, then difficulty, then repeat.
  std::size_t j = 0;
  for (std::size_t a = 0; a < attacks.size(); ++a) {
    for (Difficulty d : kAllDifficulties) {
      std::vector<LeaderboardCell> row(defenses.size());
      for (std::size_t i = 0; i < defenses.size(); ++i) row[i] = {lb.attacks[a], defenses[i].id, d, {}, false, {}};
      for (std::size_t r = 0; r < cfg.repeats; ++r, ++j) {
        for (std::size_t i = 0; i < defenses.size(); ++i) {
          if (!jobs[j].errors[i].empty()) {
            row[i].failed = true;
            if (row[i].error.empty()) row[i].error = jobs[j].errors[i];
          } else {
            row[i].accuracies.push_back(jobs[j].accuracy[i]);
          }
        }
      }
      for (auto& c : row) {
        if (c.failed) c.accuracies.clear();
        lb.cells.push_back(std::move(c));
      }
    }
  }
  score_leaderboard(lb);
  return lb;
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  if (text == "markdown" || text == "md") return OutputFormat::Markdown;
  throw Error(ErrorCode::InvalidArgument, "unknown output format '" + std::string(text) + "'");
}

std::string format_stat(const Stat& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * s.mean, 100.0 * s.std);
  return buf;
}

namespace {

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }
Stat stat_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

json scores_json(const std::array<ScoreSet, 4>& s) {
  json out = json::object();
  for (Difficulty d : kAllDifficulties) {
    const auto& x = s[difficulty_index(d)];
    out[std::string(to_string(d))] = {
        {"avg", stat_json(x.avg)}, {"avg3", stat_json(x.avg3)}, {"weighted", stat_json(x.weighted)}};
  }
  return out;
}

std::array<ScoreSet, 4> scores_from(const json& j) {
  std::array<ScoreSet, 4> out{};
  for (Difficulty d : kAllDifficulties) {
    const json& x = j.at(std::string(to_string(d)));
    out[difficulty_index(d)] = {stat_from(x.at("avg")), stat_from(x.at("avg3")), stat_from(x.at("weighted"))};
  }
  return out;
}

std::string cell_text(const Leaderboard& lb, std::string_view a, std::string_view d, Difficulty diff) {
  const auto* c = lb.cell(a, d, diff);
  if (!c || c->failed) return "—";
  return format_stat(c->stat());
}

std::string emit_markdown(const Leaderboard& lb) {
  std::ostringstream out;
  out << "# Leaderboard: " << lb.dataset << " (" << lb.repeats << " repeats)\n";
  for (Difficulty diff : kAllDifficulties) {
    const std::size_t di = difficulty_index(diff);
    out << "\n## Difficulty " << to_string(diff) << "\n\n| Attack |";
    for (const auto& d : lb.defenses) out << ' ' << d << " |";
    out << " Avg | Avg-3-Max | Weighted |\n|---|";
    for (std::size_t i = 0; i < lb.defenses.size() + 3; ++i) out << "---|";
    out << '\n';
    if (lb.defenses.empty()) continue;
    out << "| " << kNoAttack << " |";
    for (const auto& d : lb.defenses) out << ' ' << cell_text(lb, kNoAttack, d, diff) << " |";
    out << " | | |\n";
    for (std::size_t a = 0; a < lb.attacks.size(); ++a) {
      out << "| " << lb.attacks[a] << " |";
      for (const auto& d : lb.defenses) out << ' ' << cell_text(lb, lb.attacks[a], d, diff) << " |";
      const auto& s = lb.attack_scores[a][di];
      out << ' ' << format_stat(s.avg) << " | " << format_stat(s.avg3) << " | " << format_stat(s.weighted) << " |\n";
    }
    const char* names[] = {"Avg", "Avg-3-Min", "Weighted"};
    for (int k = 0; k < 3; ++k) {
      out << "| " << names[k] << " |";
      for (std::size_t i = 0; i < lb.defenses.size(); ++i) {
        const auto& s = lb.defense_scores[i][di];
        out << ' ' << format_stat(k == 0 ? s.avg : k == 1 ? s.avg3 : s.weighted) << " |";
      }
      out << " | | |\n";
    }
  }
  return out.str();
}

std::string emit_csv(const Leaderboard& lb) {
  std::ostringstream out;
  out << "attack,defense,difficulty,mean,std,repeats,failed\n";
  std::vector<std::string> rows{std::string(kNoAttack)};
  rows.insert(rows.end(), lb.attacks.begin(), lb.attacks.end());
  char buf[64];
  for (Difficulty diff : kAllDifficulties) {
    for (const auto& a : rows) {
      for (const auto& d : lb.defenses) {
        const auto* c = lb.cell(a, d, diff);
        if (!c) continue;
        const Stat s = c->stat();
        out << a << ',' << d << ',' << to_string(diff) << ',';
        if (c->failed) {
          out << ",," << c->accuracies.size() << ",1\n";
        } else {
          std::snprintf(buf, sizeof buf, "%.6f,%.6f", s.mean, s.std);
          out << buf << ',' << c->accuracies.size() << ",0\n";
        }
      }
    }
  }
  return out.str();
}

json to_json(const Leaderboard& lb) {
  json cells = json::array();
  for (const auto& c : lb.cells) {
    const Stat s = c.stat();
    cells.push_back({{"attack", c.attack},
                     {"defense", c.defense},
                     {"difficulty", to_string(c.difficulty)},
                     {"accuracies", c.accuracies},
                     {"mean", c.failed ? json(nullptr) : json(s.mean)},
                     {"std", c.failed ? json(nullptr) : json(s.std)},
                     {"failed", c.failed},
                     {"error", c.error}});
  }
  json defense_scores = json::array();
  for (std::size_t i = 0; i < lb.defenses.size(); ++i) {
    defense_scores.push_back({{"defense", lb.defenses[i]}, {"rank", i + 1}, {"scores", scores_json(lb.defense_scores[i])}});
  }
  json attack_scores = json::array();
  for (std::size_t i = 0; i < lb.attacks.size(); ++i) {
    attack_scores.push_back({{"attack", lb.attacks[i]}, {"rank", i + 1}, {"scores", scores_json(lb.attack_scores[i])}});
  }
  return {{"format", "GRBL1"},         {"dataset", lb.dataset},    {"repeats", lb.repeats},
          {"base_seed", lb.base_seed}, {"attacks", lb.attacks},    {"defenses", lb.defenses},
          {"cells", cells},            {"defense_scores", defense_scores}, {"attack_scores", attack_scores}};
}

}  // namespace

std::string emit_leaderboard(const Leaderboard& lb, OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return emit_csv(lb);
    case OutputFormat::Json: return to_json(lb).dump(2) + "\n";
    case OutputFormat::Markdown: return emit_markdown(lb);
  }
  return {};
}

Leaderboard parse_leaderboard_json(const std::string& text) {
  Leaderboard lb;
  try {
    const json j = json::parse(text);
    if (j.at("format") != "GRBL1") throw Error(ErrorCode::FormatError, "not a GRBL1 leaderboard");
    lb.dataset = j.at("dataset").get<std::string>();
    lb.repeats = j.at("repeats").get<std::size_t>();
    lb.base_seed = j.at("base_seed").get<std::uint64_t>();
    lb.attacks = j.at("attacks").get<std::vector<std::string>>();
    lb.defenses = j.at("defenses").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
      LeaderboardCell cell;
      cell.attack = c.at("attack").get<std::string>();
      cell.defense = c.at("defense").get<std::string>();
      cell.difficulty = parse_difficulty(c.at("difficulty").get<std::string>());
      cell.accuracies = c.at("accuracies").get<std::vector<double>>();
      cell.failed = c.at("failed").get<bool>();
      cell.error = c.at("error").get<std::string>();
      lb.cells.push_back(std::move(cell));
    }
    for (const auto& s : j.at("defense_scores")) lb.defense_scores.push_back(scores_from(s.at("scores")));
    for (const auto& s : j.at("attack_scores")) lb.attack_scores.push_back(scores_from(s.at("scores")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "leaderboard json: " + std::string(e.what()));
  }
  return lb;
}

}  // namespace grb
