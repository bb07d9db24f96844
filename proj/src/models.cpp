#include "grb/models.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "grb/bundle_io.hpp"
#include "grb/error.hpp"
#include "grb/rng.hpp"

namespace grb {

using nlohmann::json;

std::string_view to_string(Arch a) {
  switch (a) {
    case Arch::GCN: return "GCN";
    case Arch::SGC: return "SGC";
    case Arch::TAGCN: return "TAGCN";
    case Arch::APPNP: return "APPNP";
    case Arch::GIN: return "GIN";
    case Arch::SAGE: return "SAGE";
  }
  return "?";
}

Arch parse_arch(std::string_view text) {
  std::string t(text);
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "GCN") return Arch::GCN;
  if (t == "SGC" || t == "SGCN") return Arch::SGC;
  if (t == "TAGCN") return Arch::TAGCN;
  if (t == "APPNP") return Arch::APPNP;
  if (t == "GIN") return Arch::GIN;
  if (t == "SAGE" || t == "GRAPHSAGE") return Arch::SAGE;
  throw Error(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(text) + "'");
}

ModelSpec ModelSpec::defaults(Arch arch, bool layer_norm) {
  ModelSpec s;
  s.arch = arch;
  s.layer_norm = layer_norm;
  switch (arch) {
    case Arch::SGC: s.hops = 4; break;
    case Arch::TAGCN: s.hops = 2; break;
    case Arch::APPNP:
      s.hidden_sizes = {64};
      s.hops = 10;
      s.alpha = 0.01;
      break;
    default: break;
  }
  return s;
}

void ModelSpec::validate() const {
  if (hidden_sizes.empty()) throw Error(ErrorCode::InvalidArgument, "hidden_sizes must not be empty");
  for (auto h : hidden_sizes) {
    if (h == 0) throw Error(ErrorCode::InvalidArgument, "hidden width must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout must be in [0,1)");
  if (hops < 1) throw Error(ErrorCode::InvalidArgument, "hop count must be >= 1");
  if (arch == Arch::APPNP && !(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "APPNP alpha must be in [0,1]");
  }
}

std::string ModelSpec::id() const {
  std::string s(to_string(arch));
  if (layer_norm) s += "+LN";
  return s;
}

const Matrix& TrainedModel::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.value;
  }
  throw Error(ErrorCode::InvalidArgument, "model has no parameter '" + std::string(name) + "'");
}

std::size_t TrainedModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : params) total += static_cast<std::size_t>(p.value.size());
  return total;
}

namespace {

// Layer widths for the stacked architectures: D, hidden..., L.
std::vector<std::size_t> layer_dims(const ModelSpec& spec, std::size_t in, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
  dims.push_back(out);
  return dims;
}

std::string layer_name(const char* prefix, std::size_t l, const char* suffix) {
  return std::string(prefix) + std::to_string(l) + "." + suffix;
}

}  // namespace

TrainedModel init_model(const ModelSpec& spec, std::size_t input_dim, std::size_t output_dim, std::uint64_t seed) {
  spec.validate();
  if (input_dim == 0 || output_dim == 0) throw Error(ErrorCode::InvalidArgument, "model dims must be positive");
  TrainedModel m;
  m.spec = spec;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.seed = seed;
  Rng rng(seed);

  auto glorot = [&](const std::string& name, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
    m.params.push_back({name, std::move(w)});
  };
  auto zeros = [&](const std::string& name, std::size_t width) {
    m.params.push_back({name, Matrix::Zero(1, static_cast<Eigen::Index>(width))});
  };
  auto layer_norm = [&](const std::string& prefix, std::size_t width) {
    m.params.push_back({prefix + ".gain", Matrix::Ones(1, static_cast<Eigen::Index>(width))});
    zeros(prefix + ".bias", width);
  };

  if (spec.layer_norm) layer_norm("ln_in", input_dim);

  if (spec.arch == Arch::SGC) {
    glorot("linear.weight", input_dim, output_dim);
    zeros("linear.bias", output_dim);
    return m;
  }

  const auto dims = layer_dims(spec, input_dim, output_dim);
  const std::size_t layers = dims.size() - 1;
  const char* prefix = spec.arch == Arch::APPNP ? "mlp" : "conv";
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    switch (spec.arch) {
      case Arch::TAGCN:
        for (int j = 0; j <= spec.hops; ++j) {
          glorot(layer_name(prefix, l, ("weight" + std::to_string(j)).c_str()), in, out);
        }
        break;
      case Arch::SAGE:
        glorot(layer_name(prefix, l, "self"), in, out);
        glorot(layer_name(prefix, l, "neigh"), in, out);
        break;
      default:
        glorot(layer_name(prefix, l, "weight"), in, out);
        break;
    }
    zeros(layer_name(prefix, l, "bias"), out);
    if (spec.layer_norm && l + 1 < layers) layer_norm("ln" + std::to_string(l), out);
  }
  return m;
}

OperatorPtr gcn_normalize(const GraphBundle& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeId v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  CsrMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  m.col_idx.reserve(g.col_idx().size() + n);
  m.values.reserve(g.col_idx().size() + n);
  for (NodeId v = 0; v < n; ++v) {
    bool self_done = false;
    auto emit_self = [&] {
      m.col_idx.push_back(v);
      m.values.push_back(inv_sqrt[v] * inv_sqrt[v]);
      self_done = true;
    };
    for (NodeId w : g.neighbors(v)) {
      if (!self_done && w > v) emit_self();
      m.col_idx.push_back(w);
      m.values.push_back(inv_sqrt[v] * inv_sqrt[w]);
    }
    if (!self_done) emit_self();
    m.row_ptr[v + 1] = m.col_idx.size();
  }
  return PropagationOperator::from_sparse(std::move(m));
}

OperatorPtr gcn_normalize_dense(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw Error(ErrorCode::ShapeMismatch, "adjacency must be square");
  Matrix a = adjacency;
  a.diagonal().array() += 1.0;
  Eigen::VectorXd deg = a.rowwise().sum();
  Eigen::VectorXd inv_sqrt = deg.array().max(1e-8).rsqrt();
  Matrix out = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  out = 0.5 * (out + out.transpose()).eval();
  return PropagationOperator::from_dense(std::move(out));
}

OperatorPtr row_normalize(const GraphBundle& g) {
  const std::size_t n = g.num_nodes();
  CsrMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  for (NodeId v = 0; v < n; ++v) {
    const double w = 1.0 / static_cast<double>(g.degree(v) + 1);
    bool self_done = false;
    for (NodeId u : g.neighbors(v)) {
      if (!self_done && u > v) {
        m.col_idx.push_back(v);
        m.values.push_back(w);
        self_done = true;
      }
      m.col_idx.push_back(u);
      m.values.push_back(w);
    }
    if (!self_done) {
      m.col_idx.push_back(v);
      m.values.push_back(w);
    }
    m.row_ptr[v + 1] = m.col_idx.size();
  }
  return PropagationOperator::from_sparse(std::move(m));
}

OperatorPtr raw_adjacency(const GraphBundle& g) { return PropagationOperator::from_sparse(g.adjacency_matrix()); }

OperatorPtr build_operator(Arch arch, const GraphBundle& g) {
  switch (arch) {
    case Arch::SAGE: return row_normalize(g);
    case Arch::GIN: return raw_adjacency(g);
    default: return gcn_normalize(g);
  }
}

ModelBinding bind(Tape& tape, const TrainedModel& model, bool requires_grad) {
  ModelBinding b;
  b.params.reserve(model.params.size());
  for (const auto& p : model.params) b.params.push_back(tape.input(p.value, requires_grad));
  return b;
}

namespace {

std::mutex g_observer_mutex;
ForwardObserver g_observer;
std::atomic<bool> g_observer_set{false};

void notify_observer(const TrainedModel& model) {
  if (!g_observer_set.load(std::memory_order_acquire)) return;
  std::lock_guard lock(g_observer_mutex);
  if (g_observer) g_observer(model);
}

class ParamLookup {
 public:
  ParamLookup(const TrainedModel& model, const ModelBinding& binding) : model_(model), binding_(binding) {
    if (binding.params.size() != model.params.size()) {
      throw Error(ErrorCode::InvalidArgument, "binding does not match model parameters");
    }
  }
  Var operator()(const std::string& name) const {
    for (std::size_t i = 0; i < model_.params.size(); ++i) {
      if (model_.params[i].name == name) return binding_.params[i];
    }
    throw Error(ErrorCode::InvalidArgument, "model has no parameter '" + name + "'");
  }

 private:
  const TrainedModel& model_;
  const ModelBinding& binding_;
};

}  // namespace

void set_forward_observer(ForwardObserver observer) {
  std::lock_guard lock(g_observer_mutex);
  g_observer = std::move(observer);
  g_observer_set.store(static_cast<bool>(g_observer), std::memory_order_release);
}

Var forward_logits(Tape& tape, const TrainedModel& model, const ModelBinding& binding, const OperatorPtr& op, Var x,
                   ForwardTrace* trace) {
  notify_observer(model);
  const ModelSpec& spec = model.spec;
  const Matrix& xv = tape.value(x);
  if (static_cast<std::size_t>(xv.cols()) != model.input_dim) {
    throw Error(ErrorCode::ShapeMismatch, "features have " + std::to_string(xv.cols()) + " columns, model expects " +
                                              std::to_string(model.input_dim));
  }
  if (!op || op->dim() != static_cast<std::size_t>(xv.rows())) {
    throw Error(ErrorCode::ShapeMismatch, "propagation operator does not match the node count");
  }
  ParamLookup p(model, binding);
  auto propagate = [&](Var h) {
    Var out = tape.spmm(op, h);
    if (trace) trace->propagations.emplace_back(h, out);
    return out;
  };

  Var h = x;
  if (spec.layer_norm) h = tape.layer_norm_rows(h, p("ln_in.gain"), p("ln_in.bias"));

  if (spec.arch == Arch::SGC) {
    for (int k = 0; k < spec.hops; ++k) h = propagate(h);
    return tape.add_bias(tape.matmul(h, p("linear.weight")), p("linear.bias"));
  }

  const std::size_t layers = spec.hidden_sizes.size() + 1;
  auto hidden_tail = [&](Var v, std::size_t l) {
    v = tape.relu(v);
    v = tape.dropout(v, spec.dropout);
    if (spec.layer_norm) {
      const std::string ln = "ln" + std::to_string(l);
      v = tape.layer_norm_rows(v, p(ln + ".gain"), p(ln + ".bias"));
    }
    return v;
  };

  if (spec.arch == Arch::APPNP) {
    for (std::size_t l = 0; l < layers; ++l) {
      h = tape.add_bias(tape.matmul(h, p(layer_name("mlp", l, "weight"))), p(layer_name("mlp", l, "bias")));
      if (l + 1 < layers) h = hidden_tail(h, l);
    }
    const Var head = h;
    Var z = head;
    for (int k = 0; k < spec.hops; ++k) z = tape.scale_add(1.0 - spec.alpha, propagate(z), spec.alpha, head);
    return z;
  }

  for (std::size_t l = 0; l < layers; ++l) {
    Var out;
    switch (spec.arch) {
      case Arch::GCN:
        out = propagate(tape.matmul(h, p(layer_name("conv", l, "weight"))));
        break;
      case Arch::TAGCN: {
        Var power = h;
        out = tape.matmul(h, p(layer_name("conv", l, "weight0")));
        for (int j = 1; j <= spec.hops; ++j) {
          power = propagate(power);
          out = tape.scale_add(1.0, out, 1.0,
                               tape.matmul(power, p(layer_name("conv", l, ("weight" + std::to_string(j)).c_str()))));
        }
        break;
      }
      case Arch::GIN: {
        Var agg = tape.scale_add(1.0 + spec.gin_eps, h, 1.0, propagate(h));
        out = tape.matmul(agg, p(layer_name("conv", l, "weight")));
        break;
      }
      case Arch::SAGE:
        out = tape.scale_add(1.0, tape.matmul(h, p(layer_name("conv", l, "self"))), 1.0,
                             tape.matmul(propagate(h), p(layer_name("conv", l, "neigh"))));
        break;
      default:
        throw Error(ErrorCode::InvalidArgument, "unhandled architecture");
    }
    h = tape.add_bias(out, p(layer_name("conv", l, "bias")));
    if (l + 1 < layers) h = hidden_tail(h, l);
  }
  return h;
}

Matrix forward_logits(const TrainedModel& model, const OperatorPtr& op, const Matrix& x, bool training,
                      std::uint64_t seed) {
  Tape tape(training, seed);
  ModelBinding b = bind(tape, model, false);
  Var xv = tape.input(x, false);
  return tape.value(forward_logits(tape, model, b, op, xv));
}

std::vector<std::uint32_t> argmax_rows(const Matrix& logits) {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(logits.rows()), 0);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<std::uint32_t>(best);
  }
  return out;
}

Matrix to_double(const FeatureMatrix& x) { return x.cast<double>(); }

std::vector<std::uint32_t> predict(const TrainedModel& model, const OperatorPtr& op, const FeatureMatrix& x) {
  return argmax_rows(forward_logits(model, op, to_double(x)));
}

std::vector<std::uint32_t> predict(const TrainedModel& model, const GraphBundle& g) {
  return predict(model, build_operator(model.spec.arch, g), g.features());
}

namespace {

constexpr char kCheckpointMagic[] = "GRBM1";

json spec_to_json(const ModelSpec& s) {
  return {{"arch", to_string(s.arch)}, {"hidden_sizes", s.hidden_sizes}, {"layer_norm", s.layer_norm},
          {"dropout", s.dropout},      {"hops", s.hops},                 {"alpha", s.alpha},
          {"gin_eps", s.gin_eps}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.arch = parse_arch(j.at("arch").get<std::string>());
  s.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
  s.layer_norm = j.at("layer_norm").get<bool>();
  s.dropout = j.at("dropout").get<double>();
  s.hops = j.at("hops").get<int>();
  s.alpha = j.at("alpha").get<double>();
  s.gin_eps = j.value("gin_eps", 0.0);
  return s;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path) {
  json header = {{"format", kCheckpointMagic},
                 {"spec", spec_to_json(model.spec)},
                 {"input_dim", model.input_dim},
                 {"output_dim", model.output_dim},
                 {"seed", model.seed}};
  json shapes = json::array();
  std::vector<char> blob;
  for (const auto& p : model.params) {
    shapes.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = p.value.cast<float>();
    io::append_f32(blob, std::span<const float>(f.data(), static_cast<std::size_t>(f.size())));
  }
  header["params"] = shapes;
  const std::string text = header.dump();

  std::string out(kCheckpointMagic);
  const std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  out += text;
  out.append(blob.begin(), blob.end());
  io::write_text_file(path, out);
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = io::read_text_file(path);
  const std::size_t magic_len = sizeof(kCheckpointMagic) - 1;
  if (bytes.size() < magic_len + 8 || bytes.compare(0, magic_len, kCheckpointMagic) != 0) {
    throw Error(ErrorCode::FormatError, path.string() + " is not a GRBM1 checkpoint");
  }
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[magic_len + i])) << (8 * i);
  }
  const std::size_t header_begin = magic_len + 8;
  if (bytes.size() < header_begin + len) throw Error(ErrorCode::FormatError, "truncated checkpoint header");
  TrainedModel m;
  std::vector<float> blob;
  json header;
  try {
    header = json::parse(bytes.substr(header_begin, len));
    m.spec = spec_from_json(header.at("spec"));
    m.input_dim = header.at("input_dim").get<std::size_t>();
    m.output_dim = header.at("output_dim").get<std::size_t>();
    m.seed = header.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, "checkpoint header: " + std::string(e.what()));
  }
  blob = io::parse_f32(std::span<const char>(bytes.data() + header_begin + len, bytes.size() - header_begin - len));
  std::size_t offset = 0;
  for (const auto& entry : header.at("params")) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto count = static_cast<std::size_t>(rows * cols);
    if (offset + count > blob.size()) throw Error(ErrorCode::FormatError, "checkpoint blob too short");
    Matrix value = Eigen::Map<const FeatureMatrix>(blob.data() + offset, rows, cols).cast<double>();
    m.params.push_back({entry.at("name").get<std::string>(), std::move(value)});
    offset += count;
  }
  if (offset != blob.size()) throw Error(ErrorCode::FormatError, "checkpoint blob has trailing data");
  // Rebuild a reference layout and check names/shapes agree.
  const TrainedModel reference = init_model(m.spec, m.input_dim, m.output_dim, 0);
  if (reference.params.size() != m.params.size()) throw Error(ErrorCode::FormatError, "checkpoint parameter count");
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (reference.params[i].name != m.params[i].name ||
        reference.params[i].value.rows() != m.params[i].value.rows() ||
        reference.params[i].value.cols() != m.params[i].value.cols()) {
      throw Error(ErrorCode::FormatError, "checkpoint parameter '" + m.params[i].name + "' does not match spec");
    }
  }
  return m;
}

}  // namespace grb
