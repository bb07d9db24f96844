#include "grb/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "grb/bundle_io.hpp"
#include "grb/error.hpp"
#include "grb/leaderboard.hpp"
#include "grb/metrics.hpp"
#include "grb/rng.hpp"
#include "grb/selftest.hpp"
#include "grb/synthetic.hpp"

#ifndef GRB_VERSION
#define GRB_VERSION "0.0.0"
#endif

namespace grb {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ModelEntry::display_id() const {
  if (!id.empty()) return id;
  std::string s = spec.id();
  if (adversarial) s += "+AT";
  if (svd_rank > 0) s += "+SVD";
  return s;
}

void RunConfig::validate() const {
  std::optional<Scenario> seen = scenario;
  std::set<std::string> ids;
  for (const auto& a : attacks) {
    const Scenario s = scenario_of(a.method);
    if (seen && *seen != s) {
      throw Error(ErrorCode::InvalidArgument, "attack " + std::string(to_string(a.method)) + " is a " +
                                                  std::string(to_string(s)) + " attack; the run is " +
                                                  std::string(to_string(*seen)));
    }
    seen = s;
    const std::string id = a.id.empty() ? std::string(to_string(a.method)) : a.id;
    if (!ids.insert(id).second) throw Error(ErrorCode::InvalidArgument, "duplicate attack id " + id);
  }
  ids.clear();
  for (const auto& m : models) {
    m.spec.validate();
    if (!ids.insert(m.display_id()).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate model id " + m.display_id());
    }
  }
  surrogate.spec.validate();
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  if (!(edge_ratio >= 0.0 && edge_ratio <= 1.0)) throw Error(ErrorCode::InvalidArgument, "edge_ratio must be in [0,1]");
  train.validate();
  if (at) at->validate();
}

namespace {

// ---- config (de)serialization ----

json spec_json(const ModelEntry& m) {
  json j{{"arch", to_string(m.spec.arch)},
         {"layer_norm", m.spec.layer_norm},
         {"hidden_sizes", m.spec.hidden_sizes},
         {"dropout", m.spec.dropout},
         {"hops", m.spec.hops},
         {"alpha", m.spec.alpha},
         {"gin_eps", m.spec.gin_eps},
         {"adversarial", m.adversarial},
         {"svd_rank", m.svd_rank}};
  if (!m.id.empty()) j["id"] = m.id;
  if (!m.checkpoint.empty()) j["checkpoint"] = m.checkpoint;
  return j;
}

ModelEntry spec_from_json(const json& j) {
  ModelEntry m;
  m.spec = ModelSpec::defaults(parse_arch(j.at("arch").get<std::string>()), j.value("layer_norm", false));
  if (j.contains("hidden_sizes")) m.spec.hidden_sizes = j["hidden_sizes"].get<std::vector<std::size_t>>();
  m.spec.dropout = j.value("dropout", m.spec.dropout);
  m.spec.hops = j.value("hops", m.spec.hops);
  m.spec.alpha = j.value("alpha", m.spec.alpha);
  m.spec.gin_eps = j.value("gin_eps", m.spec.gin_eps);
  m.adversarial = j.value("adversarial", false);
  m.svd_rank = j.value("svd_rank", std::size_t{0});
  m.id = j.value("id", std::string());
  m.checkpoint = j.value("checkpoint", std::string());
  return m;
}

json params_json(const AttackParams& p) {
  return {{"step_size", p.step_size},       {"iterations", p.iterations},     {"rnd_sigma", p.rnd_sigma},
          {"tdgia_lambda", p.tdgia_lambda}, {"tdgia_batch", p.tdgia_batch},   {"speit_group", p.speit_group},
          {"speit_window", p.speit_window}, {"fga_interval", p.fga_interval}, {"fga_max_nodes", p.fga_max_nodes}};
}

AttackSpec attack_from_json(const json& j) {
  AttackSpec a;
  a.method = parse_attack(j.at("method").get<std::string>());
  a.id = j.value("id", std::string());
  AttackParams& p = a.params;
  p.step_size = j.value("step_size", p.step_size);
  p.iterations = j.value("iterations", p.iterations);
  p.rnd_sigma = j.value("rnd_sigma", p.rnd_sigma);
  p.tdgia_lambda = j.value("tdgia_lambda", p.tdgia_lambda);
  p.tdgia_batch = j.value("tdgia_batch", p.tdgia_batch);
  p.speit_group = j.value("speit_group", p.speit_group);
  p.speit_window = j.value("speit_window", p.speit_window);
  p.fga_interval = j.value("fga_interval", p.fga_interval);
  p.fga_max_nodes = j.value("fga_max_nodes", p.fga_max_nodes);
  return a;
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key)) v = j[key].get<T>();
}

json at_json(const AtConfig& a) {
  return {{"warmup_epochs", a.warmup_epochs}, {"step_size", a.step_size},
          {"steps", a.steps},                 {"injected_nodes", a.injected_nodes},
          {"edges_per_node", a.edges_per_node}, {"feature_min", a.feature_min},
          {"feature_max", a.feature_max}};
}

AtConfig at_from_json(const json& j) {
  AtConfig a;
  a.warmup_epochs = j.value("warmup_epochs", a.warmup_epochs);
  a.step_size = j.value("step_size", a.step_size);
  a.steps = j.value("steps", a.steps);
  a.injected_nodes = j.value("injected_nodes", a.injected_nodes);
  a.edges_per_node = j.value("edges_per_node", a.edges_per_node);
  a.feature_min = j.value("feature_min", a.feature_min);
  a.feature_max = j.value("feature_max", a.feature_max);
  return a;
}

json to_json_value(const RunConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["data_dir"] = c.data_dir;
  j["preset"] = c.preset;
  if (c.scenario) j["scenario"] = to_string(*c.scenario);
  j["models"] = json::array();
  for (const auto& m : c.models) j["models"].push_back(spec_json(m));
  j["surrogate"] = spec_json(c.surrogate);
  j["attacks"] = json::array();
  for (const auto& a : c.attacks) {
    json aj = params_json(a.params);
    aj["method"] = to_string(a.method);
    if (!a.id.empty()) aj["id"] = a.id;
    j["attacks"].push_back(aj);
  }
  json b = json::object();
  put_optional(b, "max_injected_nodes", c.budget.max_injected_nodes);
  put_optional(b, "max_edges_per_injected", c.budget.max_edges_per_injected);
  put_optional(b, "feature_min", c.budget.feature_min);
  put_optional(b, "feature_max", c.budget.feature_max);
  j["budget"] = b;
  j["edge_ratio"] = c.edge_ratio;
  j["difficulty"] = to_string(c.difficulty);
  j["seed"] = c.seed;
  j["repeats"] = c.repeats;
  j["jobs"] = c.jobs;
  j["train"] = {{"lr", c.train.lr},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"eps", c.train.eps},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience}};
  if (c.at) j["at"] = at_json(*c.at);
  j["out"] = c.out;
  return j;
}

Difficulty parse_difficulty_name(const std::string& s) {
  static const std::map<std::string, Difficulty> names{
      {"easy", Difficulty::Easy}, {"medium", Difficulty::Medium}, {"hard", Difficulty::Hard}, {"full", Difficulty::Full}};
  std::string lower;
  for (char ch : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (auto it = names.find(lower); it != names.end()) return it->second;
  return parse_difficulty(s);
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) { return to_json_value(cfg).dump(2) + "\n"; }

RunConfig config_from_json(const std::string& text) {
  RunConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    c.dataset = j.value("dataset", std::string());
    c.data_dir = j.value("data_dir", std::string());
    c.preset = j.value("preset", std::string());
    if (j.contains("scenario")) c.scenario = parse_scenario(j["scenario"].get<std::string>());
    for (const auto& m : j.value("models", json::array())) c.models.push_back(spec_from_json(m));
    if (j.contains("surrogate")) c.surrogate = spec_from_json(j["surrogate"]);
    for (const auto& a : j.value("attacks", json::array())) c.attacks.push_back(attack_from_json(a));
    if (j.contains("budget")) {
      const json& b = j["budget"];
      get_optional(b, "max_injected_nodes", c.budget.max_injected_nodes);
      get_optional(b, "max_edges_per_injected", c.budget.max_edges_per_injected);
      get_optional(b, "feature_min", c.budget.feature_min);
      get_optional(b, "feature_max", c.budget.feature_max);
    }
    c.edge_ratio = j.value("edge_ratio", c.edge_ratio);
    if (j.contains("difficulty")) c.difficulty = parse_difficulty_name(j["difficulty"].get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.repeats = j.value("repeats", c.repeats);
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("train")) {
      const json& t = j["train"];
      c.train.lr = t.value("lr", c.train.lr);
      c.train.beta1 = t.value("beta1", c.train.beta1);
      c.train.beta2 = t.value("beta2", c.train.beta2);
      c.train.eps = t.value("eps", c.train.eps);
      c.train.max_epochs = t.value("max_epochs", c.train.max_epochs);
      c.train.patience = t.value("patience", c.train.patience);
    }
    if (j.contains("at")) c.at = at_from_json(j["at"]);
    c.out = j.value("out", c.out);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("bad config field: ") + e.what());
  }
  return c;
}

namespace {

// ---- pipeline helpers ----

struct Dataset {
  std::string name;
  GraphBundle graph;  // normalized features
  DifficultySplit split;
};

fs::path resolve_dataset_path(const RunConfig& c) {
  const fs::path direct(c.dataset);
  if (fs::exists(direct)) return direct;
  std::string root = c.data_dir;
  if (root.empty()) {
    if (const char* env = std::getenv("GRB_DATA_DIR")) root = env;
  }
  if (!root.empty() && fs::exists(fs::path(root) / c.dataset)) return fs::path(root) / c.dataset;
  throw Error(ErrorCode::MissingFile, "dataset '" + c.dataset + "' is neither a synthetic preset nor a directory" +
                                          (root.empty() ? std::string() : " under " + root));
}

Dataset load_dataset(const RunConfig& c) {
  if (c.dataset.empty()) throw Error(ErrorCode::InvalidArgument, "no dataset given");
  SplitConfig sc;
  sc.seed = c.seed;
  if (is_synthetic_dataset(c.dataset)) {
    const GraphBundle raw = generate_synthetic(synthetic_preset(c.dataset));
    GraphBundle g = raw.with_features(standardize_arctan(raw.features()));
    DifficultySplit split = degree_split(g, sc);
    return {c.dataset, std::move(g), std::move(split)};
  }
  const fs::path dir = resolve_dataset_path(c);
  // Output of `prep`: normalized bundle plus its split.
  if (fs::exists(dir / "splits.json") && fs::is_directory(dir / "bundle")) {
    GraphBundle g = load_bundle(dir / "bundle");
    std::string name = g.name();
    return {name, std::move(g), load_split(dir / "splits.json")};
  }
  const GraphBundle raw = load_bundle(dir);
  GraphBundle g = raw.with_features(standardize_arctan(raw.features()));
  DifficultySplit split = degree_split(g, sc);
  std::string name = g.name().empty() ? dir.filename().string() : g.name();
  return {name, std::move(g), std::move(split)};
}

bool has_preset(const std::string& name) {
  try {
    dataset_preset(name);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string preset_name(const RunConfig& c, const Dataset& d) {
  if (!c.preset.empty()) {
    dataset_preset(c.preset);  // unknown names are a validation error
    return c.preset;
  }
  if (has_preset(d.name)) return d.name;
  if (has_preset(c.dataset)) return c.dataset;
  return {};
}

AtConfig at_config(const RunConfig& c, const std::string& preset) {
  if (c.at) return *c.at;
  if (!preset.empty()) return AtConfig::from_preset(at_preset(preset));
  return AtConfig{};
}

TrainedModel train_entry(const RunConfig& c, const Dataset& d, const ModelEntry& m, const std::string& preset,
                         std::vector<EpochLog>* log) {
  if (!m.checkpoint.empty()) return load_checkpoint(m.checkpoint);
  TrainConfig tc = c.train;
  tc.seed = mix_seed(c.seed, m.display_id());
  if (m.adversarial) return adversarial_train(m.spec, d.graph, d.split, tc, at_config(c, preset), log);
  return train(m.spec, d.graph, d.split, tc, log);
}

std::shared_ptr<const TrainedModel> surrogate_model(const RunConfig& c, const Dataset& d, const std::string& preset) {
  ModelEntry s = c.surrogate;
  if (s.id.empty()) s.id = "surrogate";
  return std::make_shared<const TrainedModel>(train_entry(c, d, s, preset, nullptr));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Effective config plus manifest.json in the output directory.
void write_run_files(const RunConfig& c, const std::string& command, const std::vector<std::string>& outputs) {
  const fs::path out(c.out);
  fs::create_directories(out);
  const std::string cfg = config_to_json(c);
  io::write_text_file(out / "config.json", cfg);
  json m{{"tool", "grb"},
         {"version", GRB_VERSION},
         {"command", command},
         {"seed", c.seed},
         {"config_hash", hex64(mix_seed(0, cfg))},
         {"outputs", outputs}};
  io::write_text_file(out / "manifest.json", m.dump(2) + "\n");
}

// ---- subcommands ----

int cmd_prep(const RunConfig& c) {
  const Dataset d = load_dataset(c);
  const fs::path out(c.out);
  fs::create_directories(out);
  save_bundle(d.graph.with_name(d.name), out / "bundle");
  save_split(d.split, out / "splits.json");
  write_run_files(c, "prep", {"bundle", "splits.json"});
  std::cerr << "prep: " << d.name << " N=" << d.graph.num_nodes() << " |E|=" << d.graph.num_edges()
            << " train=" << d.split.train.size() << " val=" << d.split.val.size()
            << " test=" << d.split.test_full().size() << '\n';
  return 0;
}

std::string file_stem(const std::string& id) {
  std::string s;
  for (char ch : id) s.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_');
  return s;
}

int cmd_train(const RunConfig& c) {
  if (c.models.empty()) throw Error(ErrorCode::InvalidArgument, "no model to train (use --arch or config models)");
  const Dataset d = load_dataset(c);
  const std::string preset = preset_name(c, d);
  const fs::path out(c.out);
  fs::create_directories(out);
  std::vector<std::string> outputs;
  for (const auto& m : c.models) {
    std::vector<EpochLog> log;
    const TrainedModel model = train_entry(c, d, m, preset, &log);
    const std::string stem = file_stem(m.display_id());
    save_checkpoint(model, out / (stem + ".grbm"));
    io::write_text_file(out / (stem + ".log.jsonl"), to_jsonl(log));
    outputs.push_back(stem + ".grbm");
    outputs.push_back(stem + ".log.jsonl");
    const double acc = subset_accuracy(predict(model, d.graph), d.graph.labels(), d.split.test_full());
    std::cerr << "train: " << m.display_id() << " epochs=" << log.size() << " clean test-full acc=" << acc << '\n';
  }
  write_run_files(c, "train", outputs);
  return 0;
}

int cmd_attack(const RunConfig& c) {
  if (c.attacks.size() != 1) throw Error(ErrorCode::InvalidArgument, "attack runs exactly one method (--method)");
  const Dataset d = load_dataset(c);
  const std::string preset = preset_name(c, d);
  const AttackSpec& spec = c.attacks.front();
  const auto surrogate = surrogate_model(c, d, preset);
  const AttackBudget budget = resolve_budget(preset, scenario_of(spec.method), c.difficulty, c.edge_ratio, c.budget);
  const AttackContext ctx = make_attack_context(surrogate, d.graph, d.split, c.difficulty, budget, c.seed);
  const AttackResult result = run_attack(spec.method, ctx, spec.params);
  const auto violations = check_budget(d.graph, result, budget);
  if (!violations.empty()) throw Error(ErrorCode::InvalidBudget, violations.front());
  save_attack(result, c.out);
  write_run_files(c, "attack", {"attack.json", "features.bin"});
  std::cerr << "attack: " << result.method << " on " << to_string(c.difficulty) << ", surrogate keeps "
            << result.surrogate_accuracy_after << " of its clean predictions"
            << (result.partial ? " (partial budget)" : "") << '\n';
  return 0;
}

int cmd_eval(const RunConfig& c) {
  if (c.models.empty()) throw Error(ErrorCode::InvalidArgument, "eval needs at least one model");
  const Dataset d = load_dataset(c);
  const std::string preset = preset_name(c, d);
  const auto surrogate = surrogate_model(c, d, preset);
  std::vector<Defense> defenses;
  for (const auto& m : c.models) {
    defenses.push_back({m.display_id(), std::make_shared<const TrainedModel>(train_entry(c, d, m, preset, nullptr)),
                        m.svd_rank});
  }
  MatrixConfig mc;
  mc.preset = preset;
  mc.edge_ratio = c.edge_ratio;
  mc.repeats = c.repeats;
  mc.base_seed = c.seed;
  mc.jobs = c.jobs;
  mc.overrides = c.budget;
  const Leaderboard lb = run_matrix(d.name, d.graph, d.split, surrogate, c.attacks, defenses, mc);
  const fs::path out(c.out);
  fs::create_directories(out);
  io::write_text_file(out / "leaderboard.json", emit_leaderboard(lb, OutputFormat::Json));
  io::write_text_file(out / "leaderboard.csv", emit_leaderboard(lb, OutputFormat::Csv));
  io::write_text_file(out / "leaderboard.md", emit_leaderboard(lb, OutputFormat::Markdown));
  write_run_files(c, "eval", {"leaderboard.json", "leaderboard.csv", "leaderboard.md"});
  std::size_t failed = 0;
  for (const auto& cell : lb.cells) {
    if (cell.failed) {
      ++failed;
      std::cerr << "eval: cell " << cell.attack << " / " << cell.defense << " / " << to_string(cell.difficulty)
                << " failed: " << cell.error << '\n';
    }
  }
  std::cerr << "eval: " << lb.cells.size() << " cells, " << failed << " failed\n";
  return 0;
}

int cmd_leaderboard(const std::string& input, const std::string& format, const std::string& out) {
  Leaderboard lb = parse_leaderboard_json(io::read_text_file(input));
  score_leaderboard(lb);
  const std::string text = emit_leaderboard(lb, parse_output_format(format));
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(out, text);
  }
  return 0;
}

int cmd_selftest(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : model_grad_checks(seed)) {
    const bool pass = r.max_rel_error < 1e-4;
    ok = ok && pass;
    std::printf("grad_check %-10s max_rel_err=%.3e %s\n", r.model.c_str(), r.max_rel_error, pass ? "ok" : "FAIL");
  }
  const double metric = metric_oracle_error(1000, seed);
  const bool pass = metric < 1e-12;
  ok = ok && pass;
  std::printf("weighted_score oracle max_abs_err=%.3e %s\n", metric, pass ? "ok" : "FAIL");
  if (!ok) std::cerr << "selftest: failures above\n";
  return ok ? 0 : 3;
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
  CLI::App app{"Graph robustness benchmark: prepare data, train, attack, evaluate."};
  app.set_version_flag("--version", GRB_VERSION);
  app.require_subcommand(1);

  // Shared options; each subcommand registers the subset it uses.
  std::string config_path, dataset, data_dir, out, preset, scenario, difficulty;
  std::uint64_t seed = 0;
  std::size_t jobs = 0, repeats = 0, max_epochs = 0;
  std::string arch, method, surrogate_path;
  bool ln = false, adversarial = false;
  std::size_t iterations = 0;
  double step_size = 0.0, lr = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run config; flags override it")->check(CLI::ExistingFile);
    sub->add_option("--dataset", dataset, "synthetic preset, bundle dir, or prep output dir");
    sub->add_option("--data-dir", data_dir, "root for bare dataset names (default $GRB_DATA_DIR)");
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--preset", preset, "budget preset name");
  };

  CLI::App* prep = app.add_subcommand("prep", "normalize features and write the bundle and split");
  add_common(prep);

  CLI::App* train_cmd = app.add_subcommand("train", "train models, write checkpoints and epoch logs");
  add_common(train_cmd);
  train_cmd->add_option("--arch", arch, "GCN, SGC, TAGCN, APPNP, GIN or SAGE (replaces config models)");
  train_cmd->add_flag("--ln", ln, "layer normalization");
  train_cmd->add_flag("--at", adversarial, "adversarial training");
  train_cmd->add_option("--max-epochs", max_epochs, "epoch cap");
  train_cmd->add_option("--lr", lr, "learning rate");

  CLI::App* attack_cmd = app.add_subcommand("attack", "run one attack against a surrogate");
  add_common(attack_cmd);
  attack_cmd->add_option("--method", method, "attack method, e.g. FGSM, TDGIA, DICE, PGD-mod");
  attack_cmd->add_option("--difficulty", difficulty, "E, M, H or F");
  attack_cmd->add_option("--surrogate", surrogate_path, "surrogate checkpoint (default: train a GCN)")
      ->check(CLI::ExistingFile);
  attack_cmd->add_option("--iterations", iterations, "optimization steps");
  attack_cmd->add_option("--step-size", step_size, "feature step size");

  CLI::App* eval_cmd = app.add_subcommand("eval", "run the attack x defense matrix and write leaderboards");
  add_common(eval_cmd);
  eval_cmd->add_option("--repeats", repeats, "repeats per cell");
  eval_cmd->add_option("--jobs", jobs, "worker threads (default: all cores)");
  eval_cmd->add_option("--scenario", scenario, "injection or modification");

  std::string lb_input, lb_format = "markdown", lb_out;
  CLI::App* lb_cmd = app.add_subcommand("leaderboard", "re-score a leaderboard.json and print it");
  lb_cmd->add_option("--input", lb_input, "leaderboard.json")->required()->check(CLI::ExistingFile);
  lb_cmd->add_option("--format", lb_format, "json, csv or markdown");
  lb_cmd->add_option("--out", lb_out, "write to this file instead of stdout");

  CLI::App* selftest = app.add_subcommand("selftest", "gradient checks and metric oracle");
  selftest->add_option("--seed", seed, "seed for the random cases");

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return 1;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(seed);
    if (lb_cmd->parsed()) return cmd_leaderboard(lb_input, lb_format, lb_out);

    CLI::App* sub = app.get_subcommands().front();
    RunConfig c;
    if (!config_path.empty()) c = config_from_json(io::read_text_file(config_path));
    auto given = [&](const char* flag) { return sub->count(flag) > 0; };
    if (given("--dataset")) c.dataset = dataset;
    if (given("--data-dir")) c.data_dir = data_dir;
    if (given("--seed")) c.seed = seed;
    if (given("--out")) c.out = out;
    if (given("--preset")) c.preset = preset;

    if (sub == train_cmd) {
      if (given("--arch")) {
        ModelEntry m;
        m.spec = ModelSpec::defaults(parse_arch(arch), ln);
        m.adversarial = adversarial;
        c.models = {m};
      } else if (given("--ln") || given("--at")) {
        throw Error(ErrorCode::InvalidArgument, "--ln/--at need --arch");
      }
      if (given("--max-epochs")) c.train.max_epochs = max_epochs;
      if (given("--lr")) c.train.lr = lr;
    } else if (sub == attack_cmd) {
      if (given("--method")) {
        AttackSpec a;
        a.method = parse_attack(method);
        c.attacks = {a};
      }
      if (c.attacks.size() == 1) {
        AttackParams& p = c.attacks.front().params;
        if (given("--iterations")) p.iterations = iterations;
        if (given("--step-size")) p.step_size = step_size;
      }
      if (given("--difficulty")) c.difficulty = parse_difficulty_name(difficulty);
      if (given("--surrogate")) c.surrogate.checkpoint = surrogate_path;
    } else if (sub == eval_cmd) {
      if (given("--repeats")) c.repeats = repeats;
      if (given("--jobs")) c.jobs = jobs;
      if (given("--scenario")) c.scenario = parse_scenario(scenario);
    }
    c.validate();

    if (sub == prep) return cmd_prep(c);
    if (sub == train_cmd) return cmd_train(c);
    if (sub == attack_cmd) return cmd_attack(c);
    if (sub == eval_cmd) return cmd_eval(c);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace grb
