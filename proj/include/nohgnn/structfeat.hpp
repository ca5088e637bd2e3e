#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/graph_data.hpp"
#include "nohgnn/tensor.hpp"

namespace nohgnn {

// Parameter handles bound to one tape, keyed by ParamStore name.
class ParamVars {
 public:
  ParamVars(Tape& tape, const ParamStore& store);
  Var operator[](const std::string& name) const;
  const std::map<std::string, Var>& all() const { return vars_; }

 private:
  std::map<std::string, Var> vars_;
};

// Uniform Glorot initialization for a fan_in x fan_out matrix.
Tensor3 xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

// Multi-hop overlap tensor B = sum_{k<=K} A^k over the masked adjacency.
SliceSparse3 compute_overlap_tensor(const DynamicGraph& masked, std::size_t hops);

// B carries no gradient, so it is computed once per (dataset, K, split seed).
class OverlapCache {
 public:
  std::shared_ptr<const SliceSparse3> get(const DynamicGraph& masked, std::size_t hops, std::uint64_t dataset_key);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::size_t>, std::shared_ptr<const SliceSparse3>> entries_;
};

// g_edge: 1 -> F -> F and g_theta: F -> F -> F perceptrons, ReLU between
// layers, registered as gen.edge.* and gen.theta.*.
void init_generator_params(ParamStore& store, std::size_t dim, std::mt19937_64& rng);

// B regrouped for the generator. Because g_edge sees only the scalar b_ijt,
// the neighbor sum is evaluated as counts(row (t, i), distinct value) times
// g_edge(distinct values).
struct StructuralInputs {
  std::size_t nodes = 0;
  std::size_t slots = 0;
  std::shared_ptr<const SliceSparse3> counts;  // (N*T) x m, one slice; row t*N + i
  Tensor3 distinct_values;                     // m x 1 x 1
};

StructuralInputs prepare_structural_inputs(const SliceSparse3& overlap);

// o_it = g_theta(sum_{j in supp(B_t row i)} g_edge(b_ijt)), as an N x F x T
// tensor. `linear` bypasses the ReLUs.
Var generate_features(Tape& tape, const StructuralInputs& inputs, const ParamVars& params, bool linear = false);
Tensor3 generate_features(const SliceSparse3& overlap, const ParamStore& params, bool linear = false);

}  // namespace nohgnn
