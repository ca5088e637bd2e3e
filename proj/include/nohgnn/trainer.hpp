#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/graph_data.hpp"
#include "nohgnn/model.hpp"
#include "nohgnn/structfeat.hpp"

namespace nohgnn {

inline const std::vector<double> kLearningRateGrid{0.1, 0.01, 0.02, 0.05, 0.001, 0.002};
inline const std::vector<double> kBetaGrid{0.01, 0.005, 0.001, 0.0005};

struct TrainConfig {
  double learning_rate = 0.01;
  double beta_reg = 0.001;
  std::size_t max_epochs = 300;
  std::size_t patience = 10;
  std::size_t hops = 2;
  std::size_t layers = 2;
  std::size_t dim = 32;
  TransformKind transform = TransformKind::identity;
  std::uint64_t seed = 0;
  std::size_t neg_ratio = 1;
  double threshold = 0.5;

  // Throws ParameterError naming the offending key.
  void validate() const;
  ModelConfig model_config(const DynamicGraph& g) const;
};

struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double loss = 0.0;
};

std::vector<double> labels_of(const LabeledPairSet& pairs);

// Mean BCE plus beta * sum of squared parameter entries.
Var compute_loss(Tape& tape, Var probs, const std::vector<double>& labels, const ParamVars& params, double beta);
double compute_loss(std::span<const double> probs, std::span<const double> labels, const ParamStore& params,
                    double beta);

// Predictions are (y_hat >= threshold); F1 of the positive class.
Metrics evaluate(std::span<const double> probs, std::span<const double> labels, double threshold = 0.5);

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // One bias-corrected update of every parameter from its stored gradient.
  void step(ParamStore& params);
  std::size_t steps() const { return step_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t step_ = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments_;
};

// Stops once the monitored metric has not strictly improved for `patience`
// consecutive updates.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  // Returns true when training should stop after this update.
  bool update(double metric);
  bool improved() const { return improved_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  bool seen_ = false;
  bool improved_ = false;
  double best_ = 0.0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_f1 = 0.0;
  double val_acc = 0.0;
};

std::string to_json_line(const EpochLog& log);

struct TrainHooks {
  // May overwrite the validation metrics before early stopping sees them.
  std::function<void(std::size_t epoch, Metrics& val)> on_validation;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  ParamStore best_params;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::string stop_reason;
  Metrics best_val;
  Metrics test;
  std::vector<EpochLog> history;
};

TrainResult train_loop(const Dataset& data, const TrainConfig& config, const TrainHooks& hooks = {},
                       OverlapCache* cache = nullptr);

// Metrics of `params` on one role of the dataset.
Metrics evaluate_split(const Dataset& data, const NoHgnn& model, const ParamStore& params, Role role,
                       double threshold = 0.5);

struct GridEntry {
  double learning_rate = 0.0;
  double beta_reg = 0.0;
  Metrics best_val;
  Metrics test;
  std::size_t best_epoch = 0;
};

struct GridResult {
  std::vector<GridEntry> entries;
  std::size_t best = 0;  // index into entries, chosen by validation F1
  TrainResult best_run;
};

GridResult grid_search(const Dataset& data, const TrainConfig& base, const std::vector<double>& learning_rates,
                       const std::vector<double>& betas, const TrainHooks& hooks = {});

// Gradient check of the full loss on a tiny seeded instance
// (N = 6, F = 4, T = 3, K = 2, L = 2).
GradCheckReport tiny_gradcheck(TransformKind transform, std::uint64_t seed = 7, double eps = 1e-5);

}  // namespace nohgnn
