#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/graph_data.hpp"
#include "nohgnn/noa.hpp"
#include "nohgnn/structfeat.hpp"
#include "nohgnn/tensor.hpp"

namespace nohgnn {

struct ModelConfig {
  std::size_t nodes = 0;
  std::size_t slots = 0;
  std::size_t dim = 32;
  std::size_t layers = 2;
  std::size_t hops = 2;
  TransformKind transform = TransformKind::identity;
  // Bypass every ReLU (structural generator, hidden HGNN layers, decoder).
  bool linear = false;

  void validate() const;
};

// Registers embed.E, layer{l}.W, dec.* and gen.* with Glorot-uniform weights
// and zero biases.
void init_model_params(ParamStore& store, const ModelConfig& config, std::uint64_t seed);

// Tape versions of the transform-domain product.
Var tape_m_product(Tape& tape, Var x, Var y, const Transform& tf);
// Sparse left operand with values on `pattern`; `union_pattern` is
// union_across_slices(pattern) and is only used for non-identity transforms.
Var tape_m_product(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern,
                   std::shared_ptr<const SliceSparse3> union_pattern, Var y, const Transform& tf);

// H(l) = sigma(P (x) H(l-1) (x) W(l)) with H(0) = E replicated over the slots.
// sigma is ReLU on hidden layers and the identity on the last one.
Var hgnn_forward(Tape& tape, Var p_values, std::shared_ptr<const SliceSparse3> pattern,
                 std::shared_ptr<const SliceSparse3> union_pattern, const ParamVars& params, const Transform& tf,
                 std::size_t layers, bool linear = false);
Tensor3 hgnn_forward(const AggregationTensor& p, const ParamStore& params, const Transform& tf, std::size_t layers,
                     bool linear = false);

// y_hat = sigmoid(dec(h_it || h_jt)), dec = 2F -> F (ReLU) -> 1.
Var decode(Tape& tape, Var embeddings, const LabeledPairSet& pairs, const ParamVars& params, bool linear = false);
std::vector<double> decode(const Tensor3& embeddings, const LabeledPairSet& pairs, const ParamStore& params,
                           bool linear = false);

// Full model over a fixed overlap tensor B.
class NoHgnn {
 public:
  NoHgnn(ModelConfig config, std::shared_ptr<const SliceSparse3> overlap);

  const ModelConfig& config() const { return config_; }
  const Transform& transform() const { return transform_; }
  std::shared_ptr<const SliceSparse3> support() const { return support_; }

  // Structural features O and aggregation weights P on the tape.
  Var structural_features(Tape& tape, const ParamVars& params) const;
  Var aggregation(Tape& tape, const ParamVars& params) const;
  Var embeddings(Tape& tape, const ParamVars& params) const;
  Var predict(Tape& tape, const ParamVars& params, const LabeledPairSet& pairs) const;

  std::vector<double> predict(const ParamStore& params, const LabeledPairSet& pairs) const;

 private:
  ModelConfig config_;
  Transform transform_;
  std::shared_ptr<const SliceSparse3> overlap_;
  std::shared_ptr<const SliceSparse3> support_;
  std::shared_ptr<const SliceSparse3> union_support_;
  StructuralInputs structural_;
};

}  // namespace nohgnn
