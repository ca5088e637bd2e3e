#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nohgnn/trainer.hpp"

namespace nohgnn {

// Plain-text `key = value` run configuration. '#' starts a comment. Unknown
// keys are rejected; absent keys keep the defaults below.
struct RunConfig {
  std::string edges;                       // edges: raw edge-list path
  std::string dataset;                     // dataset: ingested dataset file
  std::string columns = "src,dst,ts,weight";
  std::size_t slots = 0;                   // slots: required when ingesting
  bool undirected = true;
  bool binarize = true;
  std::string out = "out";
  bool grid = false;
  TrainConfig train;

  // Sets one key from its textual value; errors name the key.
  void set(const std::string& key, const std::string& value);
  static const std::vector<std::string>& keys();
};

RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace nohgnn
