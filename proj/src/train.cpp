#include "grb/train.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "grb/attacks.hpp"
#include "grb/error.hpp"
#include "grb/rng.hpp"

namespace grb {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "lr must be positive");
  if (patience < 1) throw Error(ErrorCode::InvalidArgument, "patience must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "Adam betas must be in [0,1)");
  }
}

AtConfig AtConfig::from_preset(const AtPreset& p) {
  AtConfig c;
  c.step_size = p.step_size;
  c.steps = p.steps_per_iter;
  c.injected_nodes = p.injected_nodes;
  c.edges_per_node = p.edges_per_node;
  c.feature_min = p.feature_min;
  c.feature_max = p.feature_max;
  return c;
}

void AtConfig::validate() const {
  if (steps == 0) return;  // attack disabled
  if (injected_nodes < 1 || edges_per_node < 1) {
    throw Error(ErrorCode::InvalidArgument, "AT needs at least one injected node and one edge");
  }
  if (!(feature_min < feature_max)) throw Error(ErrorCode::InvalidArgument, "AT feature range is empty");
  if (!(step_size >= 0.0)) throw Error(ErrorCode::InvalidArgument, "AT step size must be >= 0");
}

std::string to_jsonl(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  for (const auto& e : log) {
    out << nlohmann::json{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_acc", e.val_accuracy}}.dump()
        << '\n';
  }
  return out.str();
}

Adam::Adam(const TrainConfig& cfg, const std::vector<Parameter>& params)
    : lr_(cfg.lr), beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.eps) {
  for (const auto& p : params) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(std::vector<Parameter>& params, const std::vector<Matrix>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() == 0) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params[i].value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

namespace {

double accuracy_on(const Matrix& logits, std::span<const NodeId> rows, std::span<const std::uint32_t> labels) {
  if (rows.empty()) return 0.0;
  const auto pred = argmax_rows(logits);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) hit += pred[rows[i]] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(rows.size());
}

TrainedModel run_training(const ModelSpec& spec, const GraphBundle& g, const DifficultySplit& split,
                          const TrainConfig& cfg, const AtConfig* at, std::vector<EpochLog>* log) {
  cfg.validate();
  spec.validate();
  if (at) at->validate();
  if (split.train.empty()) throw Error(ErrorCode::EmptyTrainSet, "split has no training nodes");

  // Inductive: only train ∪ val nodes exist while training.
  const std::vector<NodeId> nodes = split.train_val();
  for (NodeId v : nodes) {
    if (v >= g.num_nodes()) throw Error(ErrorCode::InvalidNode, "split references node " + std::to_string(v));
  }
  const GraphBundle sub = induced_subgraph(g, nodes);
  std::vector<NodeId> local(g.num_nodes(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<NodeId>(i);
  std::vector<NodeId> train_rows, val_rows;
  std::vector<std::uint32_t> train_labels, val_labels;
  for (NodeId v : split.train) {
    train_rows.push_back(local[v]);
    train_labels.push_back(g.labels()[v]);
  }
  for (NodeId v : split.val) {
    val_rows.push_back(local[v]);
    val_labels.push_back(g.labels()[v]);
  }
  // Without validation nodes the training accuracy drives model selection.
  const auto& select_rows = val_rows.empty() ? train_rows : val_rows;
  const auto& select_labels = val_rows.empty() ? train_labels : val_labels;

  TrainedModel model = init_model(spec, g.num_features(), g.num_classes(), cfg.seed);
  const OperatorPtr clean_op = build_operator(spec.arch, sub);
  const Matrix clean_x = to_double(sub.features());
  Adam adam(cfg, model.params);
  std::vector<Parameter> best = model.params;
  double best_acc = -1.0;
  std::size_t since_best = 0;
  Rng at_rng(mix_seed(cfg.seed, "adversarial"));
  const bool attack = at && at->steps > 0 && at->injected_nodes > 0;
  // Warm-up epochs never become the returned model once the attack phase is
  // reachable; otherwise a clean early epoch could win model selection.
  const std::size_t select_from = attack && at->warmup_epochs < cfg.max_epochs ? at->warmup_epochs : 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    OperatorPtr op = clean_op;
    Matrix injected_x;
    const Matrix* x = &clean_x;
    if (attack && epoch >= at->warmup_epochs) {
      InjectionPatch patch =
          random_injection_topology(at->injected_nodes, at->edges_per_node, train_rows, sub.num_features(), at_rng);
      patch.features = fgsm_features(model, sub, patch, train_rows, train_labels, at->step_size, at->steps,
                                     at->feature_min, at->feature_max);
      const GraphBundle injected = apply_injection(sub, patch);
      op = build_operator(spec.arch, injected);
      injected_x = to_double(injected.features());
      x = &injected_x;
    }

    Tape tape(true, mix_seed(cfg.seed, epoch));
    ModelBinding b = bind(tape, model, true);
    Var logits = forward_logits(tape, model, b, op, tape.input(*x, false));
    Var loss = tape.nll_loss(tape.log_softmax(logits), train_rows, train_labels);
    const double loss_value = tape.value(loss)(0, 0);
    if (!std::isfinite(loss_value)) {
      throw Error(ErrorCode::Diverged, "training loss became non-finite at epoch " + std::to_string(epoch));
    }
    tape.backward(loss);
    std::vector<Matrix> grads;
    grads.reserve(b.params.size());
    for (Var p : b.params) grads.push_back(tape.grad(p));
    adam.step(model.params, grads);

    const double acc = accuracy_on(forward_logits(model, clean_op, clean_x), select_rows, select_labels);
    if (log) log->push_back({epoch, loss_value, acc});
    if (epoch < select_from) continue;
    if (acc > best_acc) {
      best_acc = acc;
      best = model.params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model.params = std::move(best);
  return model;
}

}  // namespace

TrainedModel train(const ModelSpec& spec, const GraphBundle& g, const DifficultySplit& split,
                   const TrainConfig& cfg, std::vector<EpochLog>* log) {
  return run_training(spec, g, split, cfg, nullptr, log);
}

TrainedModel adversarial_train(const ModelSpec& spec, const GraphBundle& g, const DifficultySplit& split,
                               const TrainConfig& cfg, const AtConfig& at, std::vector<EpochLog>* log) {
  return run_training(spec, g, split, cfg, &at, log);
}

}  // namespace grb
