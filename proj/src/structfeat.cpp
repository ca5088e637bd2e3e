#include "nohgnn/structfeat.hpp"

#include <algorithm>
#include <cmath>

#include "nohgnn/errors.hpp"

namespace nohgnn {

ParamVars::ParamVars(Tape& tape, const ParamStore& store) {
  for (const auto& name : store.names()) vars_.emplace(name, tape.param(store, name));
}

Var ParamVars::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ParameterError("parameter '" + name + "' is not bound to the tape");
  return it->second;
}

Tensor3 xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor3 out(fan_in, fan_out, 1);
  for (auto& v : out.values()) v = dist(rng);
  return out;
}

SliceSparse3 compute_overlap_tensor(const DynamicGraph& masked, std::size_t hops) {
  return sparse_matpower_sum(masked.adjacency(), hops);
}

std::shared_ptr<const SliceSparse3> OverlapCache::get(const DynamicGraph& masked, std::size_t hops,
                                                      std::uint64_t dataset_key) {
  std::lock_guard lock(mutex_);
  auto& slot = entries_[{dataset_key, hops}];
  if (!slot) slot = std::make_shared<const SliceSparse3>(compute_overlap_tensor(masked, hops));
  return slot;
}

std::size_t OverlapCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void init_generator_params(ParamStore& store, std::size_t dim, std::mt19937_64& rng) {
  store.add("gen.edge.w1", xavier_uniform(1, dim, rng));
  store.add("gen.edge.b1", Tensor3(1, dim, 1));
  store.add("gen.edge.w2", xavier_uniform(dim, dim, rng));
  store.add("gen.edge.b2", Tensor3(1, dim, 1));
  store.add("gen.theta.w1", xavier_uniform(dim, dim, rng));
  store.add("gen.theta.b1", Tensor3(1, dim, 1));
  store.add("gen.theta.w2", xavier_uniform(dim, dim, rng));
  store.add("gen.theta.b2", Tensor3(1, dim, 1));
}

StructuralInputs prepare_structural_inputs(const SliceSparse3& overlap) {
  if (overlap.d1() != overlap.d2()) throw ShapeError("structural features: overlap slices must be square");
  for (const auto& s : overlap.slices()) {
    for (double v : s.values) {
      if (!std::isfinite(v)) throw NumericError("structural features: non-finite overlap entry");
    }
  }
  StructuralInputs in;
  in.nodes = overlap.d1();
  in.slots = overlap.d3();
  std::vector<double> distinct;
  for (const auto& s : overlap.slices()) distinct.insert(distinct.end(), s.values.begin(), s.values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<Triplet> trip;
  trip.reserve(overlap.nnz());
  for (std::size_t t = 0; t < in.slots; ++t) {
    const CsrMatrix& s = overlap.slice(t);
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p) {
        const auto c = std::lower_bound(distinct.begin(), distinct.end(), s.values[p]) - distinct.begin();
        trip.push_back({static_cast<std::uint32_t>(t * in.nodes + r), static_cast<std::uint32_t>(c), 1.0});
      }
    }
  }
  std::vector<CsrMatrix> slices;
  slices.push_back(CsrMatrix::from_triplets(in.nodes * in.slots, distinct.size(), std::move(trip)));
  in.counts = std::make_shared<const SliceSparse3>(in.nodes * in.slots, distinct.size(), std::move(slices));
  const std::size_t m = distinct.size();
  in.distinct_values = Tensor3(m, 1, 1, std::move(distinct));
  return in;
}

namespace {

Var perceptron(Tape& tape, Var x, const ParamVars& p, const std::string& prefix, bool linear) {
  Var h = ad::add_bias(tape, ad::matmul(tape, x, p[prefix + ".w1"]), p[prefix + ".b1"]);
  if (!linear) h = ad::relu(tape, h);
  return ad::add_bias(tape, ad::matmul(tape, h, p[prefix + ".w2"]), p[prefix + ".b2"]);
}

}  // namespace

Var generate_features(Tape& tape, const StructuralInputs& inputs, const ParamVars& params, bool linear) {
  const std::size_t dim = tape.value(params["gen.theta.b2"]).d2();
  const Var values = tape.constant(inputs.distinct_values);
  const Var edge_features = perceptron(tape, values, params, "gen.edge", linear);
  const Var summed = ad::sparse_matmul(tape, inputs.counts, edge_features);
  const Var node_features = perceptron(tape, summed, params, "gen.theta", linear);
  // Row t*N + i of an (N*T) x F matrix is exactly element (i, :, t) of N x F x T.
  return ad::reshape(tape, node_features, inputs.nodes, dim, inputs.slots);
}

Tensor3 generate_features(const SliceSparse3& overlap, const ParamStore& params, bool linear) {
  Tape tape;
  const ParamVars vars(tape, params);
  return tape.value(generate_features(tape, prepare_structural_inputs(overlap), vars, linear));
}

}  // namespace nohgnn
