#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "grb/graph.hpp"
#include "grb/tape.hpp"

namespace grb {

enum class Arch { GCN, SGC, TAGCN, APPNP, GIN, SAGE };
std::string_view to_string(Arch a);
Arch parse_arch(std::string_view text);

struct ModelSpec {
  Arch arch = Arch::GCN;
  std::vector<std::size_t> hidden_sizes{64, 64, 64};
  bool layer_norm = false;
  double dropout = 0.5;
  int hops = 1;         // SGC / TAGCN k, APPNP power iterations
  double alpha = 0.01;  // APPNP teleport
  double gin_eps = 0.0;

  /// Defaults per architecture: hidden 64,64,64 (APPNP: one hidden layer of
  /// 64), dropout 0.5, SGC k=4, TAGCN k=2, APPNP alpha=0.01 with k=10.
  static ModelSpec defaults(Arch arch, bool layer_norm = false);
  void validate() const;
  /// Display id, e.g. "GCN+LN".
  std::string id() const;
};

struct Parameter {
  std::string name;
  Matrix value;
};

/// Model parameters plus the spec that wires them. Immutable after training;
/// forward passes are pure.
struct TrainedModel {
  ModelSpec spec;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::uint64_t seed = 0;
  std::vector<Parameter> params;

  const Matrix& param(std::string_view name) const;
  std::size_t parameter_count() const;
};

/// Glorot-uniform weights, zero biases, unit LN gains.
TrainedModel init_model(const ModelSpec& spec, std::size_t input_dim, std::size_t output_dim, std::uint64_t seed);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree of A + I.
OperatorPtr gcn_normalize(const GraphBundle& g);
/// Same normalization for a dense (possibly low-rank, real-valued) adjacency.
/// Degrees below 1e-8 are clamped to keep the scaling finite.
OperatorPtr gcn_normalize_dense(const Matrix& adjacency);
/// D^{-1} (A + I): mean aggregation over the closed neighborhood.
OperatorPtr row_normalize(const GraphBundle& g);
/// Plain adjacency (sum aggregation, no self-loops).
OperatorPtr raw_adjacency(const GraphBundle& g);
/// The propagation operator an architecture consumes.
OperatorPtr build_operator(Arch arch, const GraphBundle& g);

/// Model parameters placed on a tape.
struct ModelBinding {
  std::vector<Var> params;
};
ModelBinding bind(Tape& tape, const TrainedModel& model, bool requires_grad);

/// (input, output) of every propagation step, in forward order.
struct ForwardTrace {
  std::vector<std::pair<Var, Var>> propagations;
};

/// Hook invoked on every forward pass with the model being evaluated. Used to
/// audit which models a code path touches.
using ForwardObserver = std::function<void(const TrainedModel&)>;
void set_forward_observer(ForwardObserver observer);

/// Records the logits of `model` on the tape. The tape's training flag
/// controls dropout.
Var forward_logits(Tape& tape, const TrainedModel& model, const ModelBinding& binding, const OperatorPtr& op, Var x,
                   ForwardTrace* trace = nullptr);

/// Convenience forward pass outside of any optimization.
Matrix forward_logits(const TrainedModel& model, const OperatorPtr& op, const Matrix& x, bool training = false,
                      std::uint64_t seed = 0);

/// Row-wise argmax, ties to the lowest class id.
std::vector<std::uint32_t> argmax_rows(const Matrix& logits);
std::vector<std::uint32_t> predict(const TrainedModel& model, const GraphBundle& g);
std::vector<std::uint32_t> predict(const TrainedModel& model, const OperatorPtr& op, const FeatureMatrix& x);

Matrix to_double(const FeatureMatrix& x);

/// "GRBM1" checkpoint: magic, u64 header length, JSON header, f32 blob.
void save_checkpoint(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace grb
