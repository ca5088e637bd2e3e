#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nohgnn/tensor.hpp"

namespace nohgnn {

// Named trainable tensors with paired gradients. Iteration is lexicographic
// by name.
class ParamStore {
 public:
  struct Entry {
    Tensor3 value;
    Tensor3 grad;
  };

  void add(const std::string& name, Tensor3 value);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Tensor3& value(const std::string& name);
  const Tensor3& value(const std::string& name) const;
  Tensor3& grad(const std::string& name);
  const Tensor3& grad(const std::string& name) const;

  void zero_grads();
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;
  std::size_t size() const { return entries_.size(); }

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> entries_;
};

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

class Tape;
using BackwardFn = std::function<void(Tape&, std::size_t self)>;

// Linear record of primitive applications. Entries are appended in
// topological order; backward visits them once, last to first.
class Tape {
 public:
  Var constant(Tensor3 value);
  // Differentiable leaf that is not a named parameter.
  Var variable(Tensor3 value);
  Var param(const ParamStore& store, const std::string& name);
  Var record(Tensor3 value, std::span<const Var> inputs, BackwardFn backward);

  const Tensor3& value(Var v) const { return nodes_[v.id].value; }
  const Tensor3& value(std::size_t id) const { return nodes_[id].value; }
  // Gradient of the last backward pass; empty when the node was not reached.
  const Tensor3& grad(Var v) const { return nodes_[v.id].grad; }
  const Tensor3& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var v) const { return requires_grad(v.id); }

  // Zero-initialized gradient buffer for `id`, created on first use.
  Tensor3& grad_buffer(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

  // Reverse pass from a scalar node. Parameter leaves add their gradient into
  // `store` when one is given.
  void backward(Var loss, ParamStore* store = nullptr);

 private:
  struct Node {
    Tensor3 value;
    Tensor3 grad;
    BackwardFn backward;
    std::string param_name;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Softmax over the given scores with max subtraction. Requires a non-empty
// input.
std::vector<double> masked_softmax(std::span<const double> scores);

namespace ad {

// Pair (i, j) at slot t used by gather_concat.
struct PairIndex {
  std::uint32_t i;
  std::uint32_t j;
  std::uint32_t t;
};

// Slice-wise product of dense operands (matrices are d3 == 1 tensors).
Var matmul(Tape& tape, Var a, Var b);
// Constant sparse left operand times a dense variable, slice by slice.
Var sparse_matmul(Tape& tape, std::shared_ptr<const SliceSparse3> a, Var b);
// Sparse left operand whose values are a variable (nnz x 1 x 1, slice-major
// over `pattern`) times a dense variable.
Var sparse_values_matmul(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern, Var b);
// Mode-3 product by a constant matrix; gradient uses its transpose.
Var mode3(Tape& tape, Var x, const Matrix& m);
// Mode-3 product of sparse values. The output lives on `union_pattern`, which
// must be union_across_slices(pattern).
Var sparse_values_mode3(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern,
                        std::shared_ptr<const SliceSparse3> union_pattern, const Matrix& m);

Var add(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double c);
// x: rows x cols matrix, bias: 1 x cols.
Var add_bias(Tape& tape, Var x, Var bias);
Var relu(Tape& tape, Var x);
Var sigmoid(Tape& tape, Var x);
Var reshape(Tape& tape, Var x, std::size_t d1, std::size_t d2, std::size_t d3);
// N x F matrix copied into every slice of an N x F x T tensor.
Var replicate_slices(Tape& tape, Var x, std::size_t T);

// values[e] = dot(x(i, :, t), x(j, :, t)) for every entry e = (i, j, t) of the pattern.
Var pair_dot(Tape& tape, Var x, std::shared_ptr<const SliceSparse3> pattern);
// Softmax of the values within each pattern row.
Var row_softmax(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern);

// Row k of the result is x(i_k, :, t_k) followed by x(j_k, :, t_k).
Var gather_concat(Tape& tape, Var x, std::shared_ptr<const std::vector<PairIndex>> pairs);

Var sum(Tape& tape, Var x);
Var sum_squares(Tape& tape, Var x);
// Mean binary cross-entropy of probabilities against 0/1 labels. Probabilities
// are clamped to [1e-12, 1 - 1e-12]; the clamp has zero gradient outside.
Var bce(Tape& tape, Var probs, std::shared_ptr<const std::vector<double>> labels);

constexpr double kProbClamp = 1e-12;

namespace testing {

// Deliberately wrong backward rules used as negative controls for gradient
// checking. Never enabled outside tests and the CLI's fault flag.
enum class Fault { none, matmul_rhs };
void set_fault(Fault fault);
Fault fault();

}  // namespace testing

}  // namespace ad

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

using LossBuilder = std::function<Var(Tape&, const ParamStore&)>;

// Compares tape gradients against central differences for every parameter
// entry. Relative error uses max(|a|, |b|, 1e-8) as denominator.
GradCheckReport grad_check(const LossBuilder& build, ParamStore& params, double eps = 1e-5);

}  // namespace nohgnn
