#include "nohgnn/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "nohgnn/errors.hpp"
#include "nohgnn/rng.hpp"

namespace nohgnn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("lr: learning rate must be positive (got " + std::to_string(learning_rate) + ")");
  }
  if (!(beta_reg >= 0.0) || !std::isfinite(beta_reg)) {
    throw ParameterError("beta: regularization coefficient must be non-negative");
  }
  if (max_epochs < 1) throw ParameterError("epochs: must be at least 1");
  if (patience < 1) throw ParameterError("patience: must be at least 1");
  if (hops < 1 || hops > 3) throw ParameterError("k_hops: must be 1, 2 or 3");
  if (layers < 1) throw ParameterError("layers: must be at least 1");
  if (dim < 1) throw ParameterError("dim: must be at least 1");
  if (neg_ratio < 1) throw ParameterError("neg_ratio: must be at least 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold: must lie in (0, 1)");
  if (transform == TransformKind::custom) throw ParameterError("transform: expected identity or dct");
}

ModelConfig TrainConfig::model_config(const DynamicGraph& g) const {
  ModelConfig mc;
  mc.nodes = g.node_count();
  mc.slots = g.slot_count();
  mc.dim = dim;
  mc.layers = layers;
  mc.hops = hops;
  mc.transform = transform;
  return mc;
}

std::vector<double> labels_of(const LabeledPairSet& pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs.entries) out.push_back(static_cast<double>(p.y));
  return out;
}

Var compute_loss(Tape& tape, Var probs, const std::vector<double>& labels, const ParamVars& params, double beta) {
  if (labels.empty()) throw ParameterError("compute_loss: empty training set");
  Var loss = ad::bce(tape, probs, std::make_shared<const std::vector<double>>(labels));
  if (beta != 0.0) {
    for (const auto& [name, v] : params.all()) {
      loss = ad::add(tape, loss, ad::scale(tape, ad::sum_squares(tape, v), beta));
    }
  }
  return loss;
}

double compute_loss(std::span<const double> probs, std::span<const double> labels, const ParamStore& params,
                    double beta) {
  Tape tape;
  const ParamVars vars(tape, params);
  const Var p = tape.constant(Tensor3(probs.size(), 1, 1, std::vector<double>(probs.begin(), probs.end())));
  return tape.value(compute_loss(tape, p, std::vector<double>(labels.begin(), labels.end()), vars, beta))[0];
}

Metrics evaluate(std::span<const double> probs, std::span<const double> labels, double threshold) {
  if (probs.empty()) throw ParameterError("evaluate: empty input");
  if (probs.size() != labels.size()) throw ShapeError("evaluate: predictions and labels differ in length");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("evaluate: threshold must lie in (0, 1)");
  Metrics m;
  double bce = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const bool predicted = probs[k] >= threshold;
    const bool actual = labels[k] > 0.5;
    if (predicted && actual) ++m.tp;
    if (predicted && !actual) ++m.fp;
    if (!predicted && actual) ++m.fn;
    if (!predicted && !actual) ++m.tn;
    const double q = std::clamp(probs[k], ad::kProbClamp, 1.0 - ad::kProbClamp);
    bce -= labels[k] * std::log(q) + (1.0 - labels[k]) * std::log(1.0 - q);
  }
  const double denom = static_cast<double>(2 * m.tp + m.fp + m.fn);
  m.f1 = denom > 0.0 ? 2.0 * static_cast<double>(m.tp) / denom : 0.0;
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(probs.size());
  m.loss = bce / static_cast<double>(probs.size());
  return m;
}

void Adam::step(ParamStore& params) {
  for (const auto& [name, e] : params.entries()) {
    for (double g : e.grad.values()) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient for parameter '" + name + "'");
    }
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (auto& [name, e] : params.entries()) {
    auto& [m, v] = moments_[name];
    if (m.size() != e.value.size()) {
      m.assign(e.value.size(), 0.0);
      v.assign(e.value.size(), 0.0);
    }
    for (std::size_t k = 0; k < e.value.size(); ++k) {
      const double g = e.grad[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      e.value[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

bool EarlyStopping::update(double metric) {
  improved_ = !seen_ || metric > best_;
  seen_ = true;
  if (improved_) {
    best_ = metric;
    stale_ = 0;
    return false;
  }
  ++stale_;
  return stale_ >= patience_;
}

std::string to_json_line(const EpochLog& log) {
  nlohmann::ordered_json j;
  j["epoch"] = log.epoch;
  j["loss"] = log.loss;
  j["val_f1"] = log.val_f1;
  j["val_acc"] = log.val_acc;
  return j.dump();
}

Metrics evaluate_split(const Dataset& data, const NoHgnn& model, const ParamStore& params, Role role,
                       double threshold) {
  LabeledPairSet pairs = data.labeled(role);
  if (role == Role::train) {
    pairs = merge(pairs, negative_sample(data.graph, data.split.train, data.neg_ratio,
                                         derive_seed(data.seed, SeedStream::train_negatives, 0)));
  }
  if (pairs.empty()) throw ParameterError("evaluate: split '" + to_string(role) + "' is empty");
  const auto probs = model.predict(params, pairs);
  const auto labels = labels_of(pairs);
  return evaluate(probs, labels, threshold);
}

TrainResult train_loop(const Dataset& data, const TrainConfig& config, const TrainHooks& hooks, OverlapCache* cache) {
  config.validate();
  if (data.split.train.empty()) throw ParameterError("train_loop: no training positives");
  const ModelConfig mc = config.model_config(data.graph);
  std::shared_ptr<const SliceSparse3> overlap;
  if (cache) {
    overlap = cache->get(data.split.masked, config.hops, data.fingerprint());
  } else {
    overlap = std::make_shared<const SliceSparse3>(compute_overlap_tensor(data.split.masked, config.hops));
  }
  const NoHgnn model(mc, overlap);
  ParamStore params;
  init_model_params(params, mc, config.seed);
  Adam adam(config.learning_rate);
  EarlyStopping stopper(config.patience);

  TrainResult result;
  result.stop_reason = "max_epochs";
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const LabeledPairSet negatives = negative_sample(data.graph, data.split.train, config.neg_ratio,
                                                     derive_seed(config.seed, SeedStream::train_negatives, epoch));
    const LabeledPairSet pairs = merge(data.split.train, negatives);
    const auto labels = labels_of(pairs);

    params.zero_grads();
    double loss_value = 0.0;
    Metrics val;
    try {
      {
        Tape tape;
        const ParamVars vars(tape, params);
        const Var probs = model.predict(tape, vars, pairs);
        const Var loss = compute_loss(tape, probs, labels, vars, config.beta_reg);
        loss_value = tape.value(loss)[0];
        if (!std::isfinite(loss_value)) throw NumericError("non-finite loss");
        tape.backward(loss, &params);
      }
      adam.step(params);
      val = evaluate_split(data, model, params, Role::val, config.threshold);
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (hooks.on_validation) hooks.on_validation(epoch, val);
    const EpochLog log{epoch, loss_value, val.f1, val.accuracy};
    result.history.push_back(log);
    if (hooks.on_epoch) hooks.on_epoch(log);
    result.epochs_run = epoch;

    const bool stop = stopper.update(val.f1);
    if (stopper.improved()) {
      result.best_params = params;
      result.best_epoch = epoch;
      result.best_val = val;
    }
    if (stop) {
      result.stop_reason = "patience";
      break;
    }
  }
  result.test = evaluate_split(data, model, result.best_params, Role::test, config.threshold);
  return result;
}

GridResult grid_search(const Dataset& data, const TrainConfig& base, const std::vector<double>& learning_rates,
                       const std::vector<double>& betas, const TrainHooks& hooks) {
  if (learning_rates.empty() || betas.empty()) throw ParameterError("grid_search: empty grid");
  OverlapCache cache;
  GridResult out;
  bool have_best = false;
  for (double lr : learning_rates) {
    for (double beta : betas) {
      TrainConfig cfg = base;
      cfg.learning_rate = lr;
      cfg.beta_reg = beta;
      TrainResult run = train_loop(data, cfg, hooks, &cache);
      out.entries.push_back(GridEntry{lr, beta, run.best_val, run.test, run.best_epoch});
      if (!have_best || run.best_val.f1 > out.best_run.best_val.f1) {
        out.best = out.entries.size() - 1;
        out.best_run = std::move(run);
        have_best = true;
      }
    }
  }
  return out;
}

GradCheckReport tiny_gradcheck(TransformKind transform, std::uint64_t seed, double eps) {
  const DynamicGraph graph = planted_partition(6, 3, 0.5, 0.2, seed);
  ModelConfig mc;
  mc.nodes = 6;
  mc.slots = 3;
  mc.dim = 4;
  mc.layers = 2;
  mc.hops = 2;
  mc.transform = transform;
  const auto overlap = std::make_shared<const SliceSparse3>(compute_overlap_tensor(graph, mc.hops));
  const NoHgnn model(mc, overlap);
  ParamStore params;
  init_model_params(params, mc, seed);

  LabeledPairSet positives;
  for (std::size_t t = 0; t < graph.slot_count(); ++t) {
    for (const auto& e : graph.edges(t)) positives.entries.push_back({e.i, e.j, static_cast<std::uint32_t>(t), 1});
  }
  const LabeledPairSet pairs = merge(positives, negative_sample(graph, positives, 1, seed));
  const auto labels = labels_of(pairs);
  constexpr double kBeta = 0.001;
  const LossBuilder build = [&](Tape& tape, const ParamStore& ps) {
    const ParamVars vars(tape, ps);
    return compute_loss(tape, model.predict(tape, vars, pairs), labels, vars, kBeta);
  };
  return grad_check(build, params, eps);
}

}  // namespace nohgnn
