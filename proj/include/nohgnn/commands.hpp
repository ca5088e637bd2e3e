#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/container.hpp"
#include "nohgnn/graph_data.hpp"
#include "nohgnn/run_config.hpp"
#include "nohgnn/trainer.hpp"

namespace nohgnn {

// Command implementations behind the CLI. Each returns the process exit
// status and writes its report to `out`, diagnostics to `err`.

inline constexpr const char* kDatasetFile = "dataset.nohg";
inline constexpr const char* kCheckpointFile = "checkpoint.nohg";
inline constexpr const char* kMetricsFile = "metrics.jsonl";

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, Role split,
             std::ostream& out, std::ostream& err);
// Exit status 0 iff the max relative error is at most 1e-4.
int cmd_gradcheck(TransformKind transform, std::uint64_t seed, bool inject_fault, std::ostream& out,
                  std::ostream& err);

// Loads the dataset named by `dataset`, or ingests `edges` in memory.
Dataset dataset_from_config(const RunConfig& cfg);

Container make_checkpoint(const ParamStore& params, const ModelConfig& model, const TrainConfig& train,
                          std::uint64_t dataset_fingerprint, const TrainResult& result);

struct LoadedCheckpoint {
  ModelConfig model;
  ParamStore params;
  std::uint64_t dataset_fingerprint = 0;
  double threshold = 0.5;
};
LoadedCheckpoint read_checkpoint(const Container& c);

// {"f1": ..., "accuracy": ..., ...} with reals rounded to 4 decimals.
std::string metrics_json(const Metrics& m, const std::string& split);

}  // namespace nohgnn
