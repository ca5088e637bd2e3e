#include "nohgnn/model.hpp"

#include "nohgnn/errors.hpp"
#include "nohgnn/rng.hpp"

namespace nohgnn {

void ModelConfig::validate() const {
  if (nodes == 0) throw ParameterError("model: node count must be positive");
  if (slots == 0) throw ParameterError("model: slot count must be positive");
  if (dim == 0) throw ParameterError("dim: feature dimension must be positive");
  if (layers == 0) throw ParameterError("layers: at least one layer is required");
  if (hops == 0) throw ParameterError("k_hops: hop count must be at least 1");
}

void init_model_params(ParamStore& store, const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(derive_seed(seed, SeedStream::init));
  const std::size_t F = config.dim;
  store.add("embed.E", xavier_uniform(config.nodes, F, rng));
  for (std::size_t l = 1; l <= config.layers; ++l) {
    Tensor3 w(F, F, config.slots);
    for (std::size_t t = 0; t < config.slots; ++t) w.slice(t) = xavier_uniform(F, F, rng).slice(0);
    store.add("layer" + std::to_string(l) + ".W", std::move(w));
  }
  init_generator_params(store, F, rng);
  store.add("dec.w1", xavier_uniform(2 * F, F, rng));
  store.add("dec.b1", Tensor3(1, F, 1));
  store.add("dec.w2", xavier_uniform(F, 1, rng));
  store.add("dec.b2", Tensor3(1, 1, 1));
}

Var tape_m_product(Tape& tape, Var x, Var y, const Transform& tf) {
  if (tf.is_identity()) return ad::matmul(tape, x, y);
  const Var xm = ad::mode3(tape, x, tf.forward);
  const Var ym = ad::mode3(tape, y, tf.forward);
  return ad::mode3(tape, ad::matmul(tape, xm, ym), tf.inverse);
}

Var tape_m_product(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern,
                   std::shared_ptr<const SliceSparse3> union_pattern, Var y, const Transform& tf) {
  if (tf.is_identity()) return ad::sparse_values_matmul(tape, values, std::move(pattern), y);
  if (!union_pattern) throw ContractError("m_product: non-identity transform needs the union pattern");
  const Var xm = ad::sparse_values_mode3(tape, values, std::move(pattern), union_pattern, tf.forward);
  const Var ym = ad::mode3(tape, y, tf.forward);
  return ad::mode3(tape, ad::sparse_values_matmul(tape, xm, union_pattern, ym), tf.inverse);
}

Var hgnn_forward(Tape& tape, Var p_values, std::shared_ptr<const SliceSparse3> pattern,
                 std::shared_ptr<const SliceSparse3> union_pattern, const ParamVars& params, const Transform& tf,
                 std::size_t layers, bool linear) {
  if (layers == 0) throw ParameterError("hgnn_forward: at least one layer is required");
  const std::size_t T = pattern->d3();
  if (tf.size() != T) throw ShapeError("hgnn_forward: transform size does not match slot count");
  const Var embed = params["embed.E"];
  if (tape.value(embed).d1() != pattern->d1()) {
    throw ShapeError("hgnn_forward: embedding rows do not match the aggregation tensor");
  }
  Var h = ad::replicate_slices(tape, embed, T);
  for (std::size_t l = 1; l <= layers; ++l) {
    const Var w = params["layer" + std::to_string(l) + ".W"];
    try {
      const Var mixed = tape_m_product(tape, p_values, pattern, union_pattern, h, tf);
      h = tape_m_product(tape, mixed, w, tf);
    } catch (const NumericError& e) {
      throw NumericError("hgnn_forward: layer " + std::to_string(l) + ": " + e.what());
    }
    if (l < layers && !linear) h = ad::relu(tape, h);
    if (!tape.value(h).all_finite()) {
      throw NumericError("hgnn_forward: non-finite activations in layer " + std::to_string(l));
    }
  }
  return h;
}

Tensor3 hgnn_forward(const AggregationTensor& p, const ParamStore& params, const Transform& tf, std::size_t layers,
                     bool linear) {
  Tape tape;
  const ParamVars vars(tape, params);
  std::shared_ptr<const SliceSparse3> union_pattern;
  if (!tf.is_identity()) union_pattern = std::make_shared<const SliceSparse3>(union_across_slices(*p.pattern));
  const Var h = hgnn_forward(tape, tape.constant(p.values), p.pattern, union_pattern, vars, tf, layers, linear);
  return tape.value(h);
}

Var decode(Tape& tape, Var embeddings, const LabeledPairSet& pairs, const ParamVars& params, bool linear) {
  auto index = std::make_shared<std::vector<ad::PairIndex>>();
  index->reserve(pairs.size());
  for (const auto& p : pairs.entries) index->push_back(ad::PairIndex{p.i, p.j, p.t});
  const Var joined = ad::gather_concat(tape, embeddings, std::move(index));
  Var hidden = ad::add_bias(tape, ad::matmul(tape, joined, params["dec.w1"]), params["dec.b1"]);
  if (!linear) hidden = ad::relu(tape, hidden);
  const Var logits = ad::add_bias(tape, ad::matmul(tape, hidden, params["dec.w2"]), params["dec.b2"]);
  return ad::sigmoid(tape, logits);
}

std::vector<double> decode(const Tensor3& embeddings, const LabeledPairSet& pairs, const ParamStore& params,
                           bool linear) {
  Tape tape;
  const ParamVars vars(tape, params);
  const Var probs = decode(tape, tape.constant(embeddings), pairs, vars, linear);
  const auto v = tape.value(probs).values();
  return {v.begin(), v.end()};
}

NoHgnn::NoHgnn(ModelConfig config, std::shared_ptr<const SliceSparse3> overlap)
    : config_(config), overlap_(std::move(overlap)) {
  config_.validate();
  if (overlap_->d1() != config_.nodes || overlap_->d2() != config_.nodes || overlap_->d3() != config_.slots) {
    throw ShapeError("NoHgnn: overlap tensor does not match the configured node/slot counts");
  }
  transform_ = make_transform(config_.transform, config_.slots);
  support_ = aggregation_support(*overlap_);
  if (!transform_.is_identity()) {
    union_support_ = std::make_shared<const SliceSparse3>(union_across_slices(*support_));
  }
  structural_ = prepare_structural_inputs(*overlap_);
}

Var NoHgnn::structural_features(Tape& tape, const ParamVars& params) const {
  return generate_features(tape, structural_, params, config_.linear);
}

Var NoHgnn::aggregation(Tape& tape, const ParamVars& params) const {
  const Var scores = overlap_scores(tape, structural_features(tape, params), support_);
  return normalize_scores(tape, scores, support_);
}

Var NoHgnn::embeddings(Tape& tape, const ParamVars& params) const {
  return hgnn_forward(tape, aggregation(tape, params), support_, union_support_, params, transform_, config_.layers,
                      config_.linear);
}

Var NoHgnn::predict(Tape& tape, const ParamVars& params, const LabeledPairSet& pairs) const {
  return decode(tape, embeddings(tape, params), pairs, params, config_.linear);
}

std::vector<double> NoHgnn::predict(const ParamStore& params, const LabeledPairSet& pairs) const {
  Tape tape;
  const ParamVars vars(tape, params);
  const auto v = tape.value(predict(tape, vars, pairs)).values();
  return {v.begin(), v.end()};
}

}  // namespace nohgnn
