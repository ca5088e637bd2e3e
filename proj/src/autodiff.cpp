#include "nohgnn/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "nohgnn/errors.hpp"

namespace nohgnn {

void ParamStore::add(const std::string& name, Tensor3 value) {
  if (contains(name)) throw ParameterError("parameter '" + name + "' registered twice");
  Tensor3 grad(value.d1(), value.d2(), value.d3());
  entries_.emplace(name, Entry{std::move(value), std::move(grad)});
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ParameterError("unknown parameter '" + name + "'");
  return it->second;
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ParameterError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor3& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor3& ParamStore::value(const std::string& name) const { return entry(name).value; }
Tensor3& ParamStore::grad(const std::string& name) { return entry(name).grad; }
const Tensor3& ParamStore::grad(const std::string& name) const { return entry(name).grad; }

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries_) {
    if (!e.grad.same_shape(e.value)) e.grad = Tensor3(e.value.d1(), e.value.d2(), e.value.d3());
    e.grad.fill(0.0);
  }
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.size();
  return n;
}

Var Tape::constant(Tensor3 value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
  return Var{nodes_.size() - 1};
}

Var Tape::variable(Tensor3 value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, true});
  return Var{nodes_.size() - 1};
}

Var Tape::param(const ParamStore& store, const std::string& name) {
  nodes_.push_back(Node{store.value(name), {}, {}, name, true});
  return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor3 value, std::span<const Var> inputs, BackwardFn backward) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [this](Var v) { return nodes_[v.id].requires_grad; });
  Node node{std::move(value), {}, {}, {}, needs};
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Tensor3& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || !n.grad.same_shape(n.value)) {
    n.grad = Tensor3(n.value.d1(), n.value.d2(), n.value.d3());
  }
  return n.grad;
}

void Tape::backward(Var loss, ParamStore* store) {
  if (loss.id >= nodes_.size()) throw ContractError("backward: loss is not on this tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " + nodes_[loss.id].value.shape_string());
  }
  for (auto& n : nodes_) n.grad = Tensor3();
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss.id)[0] = 1.0;
  for (std::size_t k = loss.id + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, k);
    if (store != nullptr && !n.param_name.empty()) {
      Tensor3& g = store->grad(n.param_name);
      if (!g.same_shape(n.grad)) throw ShapeError("backward: gradient shape mismatch for " + n.param_name);
      for (std::size_t e = 0; e < g.size(); ++e) g[e] += n.grad[e];
    }
  }
}

std::vector<double> masked_softmax(std::span<const double> scores) {
  if (scores.empty()) throw ParameterError("masked_softmax: empty support");
  const double peak = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out[k] = std::exp(scores[k] - peak);
    total += out[k];
  }
  for (auto& v : out) v /= total;
  return out;
}

namespace {

double evaluate_loss(const LossBuilder& build, const ParamStore& params) {
  Tape tape;
  const Var loss = build(tape, params);
  const Tensor3& v = tape.value(loss);
  if (v.size() != 1) throw ContractError("grad_check: loss must be a scalar");
  if (!std::isfinite(v[0])) throw NumericError("grad_check: non-finite loss");
  return v[0];
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& build, ParamStore& params, double eps) {
  if (!(eps > 0.0)) throw ParameterError("grad_check: eps must be positive");
  params.zero_grads();
  {
    Tape tape;
    const Var loss = build(tape, params);
    if (!std::isfinite(tape.value(loss)[0])) throw NumericError("grad_check: non-finite loss");
    tape.backward(loss, &params);
  }
  GradCheckReport report;
  for (auto& [name, entry] : params.entries()) {
    const Tensor3 analytic = entry.grad;
    for (std::size_t k = 0; k < entry.value.size(); ++k) {
      const double original = entry.value[k];
      entry.value[k] = original + eps;
      const double up = evaluate_loss(build, params);
      entry.value[k] = original - eps;
      const double down = evaluate_loss(build, params);
      entry.value[k] = original;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = rel;
        report.worst_param = name;
        report.worst_index = k;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace nohgnn
