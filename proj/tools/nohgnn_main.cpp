// Command-line entry point: ingest, train, eval, gradcheck.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nohgnn/commands.hpp"
#include "nohgnn/errors.hpp"

namespace {

// Flag values collected as text and applied through RunConfig::set so that
// config files and flags share one validation path.
struct Overrides {
  std::map<std::string, std::string> values;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  void apply(nohgnn::RunConfig& cfg) const {
    for (const auto& [key, value] : values) cfg.set(key, value);
  }
};

void add_data_flags(CLI::App* app, Overrides& o, bool& directed, bool& weighted) {
  o.bind(app, "--edges", "edges", "Edge-list file: 'src dst timestamp [weight]' per line");
  o.bind(app, "--slots", "slots", "Number of time slots T");
  o.bind(app, "--columns", "columns", "Column order of the edge list (default src,dst,ts,weight; '_' skips)");
  o.bind(app, "--seed", "seed", "Random seed for splits, negatives and initialization");
  o.bind(app, "--neg-ratio", "neg_ratio", "Negatives per positive (default 1)");
  app->add_flag("--directed", directed, "Keep edge direction (default: undirected)");
  app->add_flag("--weighted", weighted, "Accumulate edge weights instead of binarizing the adjacency");
}

void add_model_flags(CLI::App* app, Overrides& o) {
  o.bind(app, "--k-hops", "k_hops", "Maximum hop count K of the overlap tensor (1-3, default 2)");
  o.bind(app, "--layers", "layers", "Number of high-order layers L (default 2)");
  o.bind(app, "--dim", "dim", "Feature dimension F (default 32)");
  o.bind(app, "--lr", "lr", "Adam learning rate (default 0.01)");
  o.bind(app, "--beta", "beta", "L2 regularization coefficient (default 0.001)");
  o.bind(app, "--transform", "transform", "Mode-3 transform: identity or dct (default identity)");
  o.bind(app, "--epochs", "epochs", "Maximum epochs (default 300)");
  o.bind(app, "--patience", "patience", "Early-stopping patience in epochs (default 10)");
}

nohgnn::RunConfig build_config(const std::string& config_path, const Overrides& o, bool directed, bool weighted) {
  nohgnn::RunConfig cfg = config_path.empty() ? nohgnn::RunConfig{} : nohgnn::load_run_config(config_path);
  o.apply(cfg);
  if (directed) cfg.undirected = false;
  if (weighted) cfg.binarize = false;
  return cfg;
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const nohgnn::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nohgnn::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NO-HGNN: neighborhood-overlap-aware high-order GNN for dynamic link prediction"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Bin an edge list into snapshots, split it and cache the dataset");
  Overrides ingest_o;
  std::string ingest_cfg;
  bool ingest_directed = false;
  bool ingest_weighted = false;
  ingest->add_option("--config", ingest_cfg, "Run configuration file (key = value)");
  add_data_flags(ingest, ingest_o, ingest_directed, ingest_weighted);
  ingest_o.bind(ingest, "--out", "out", "Output directory (writes dataset.nohg)");

  // train
  auto* train = app.add_subcommand("train", "Train on a cached dataset or an edge list");
  Overrides train_o;
  std::string train_cfg;
  bool train_directed = false;
  bool train_weighted = false;
  bool grid = false;
  train->add_option("--config", train_cfg, "Run configuration file (key = value)");
  train_o.bind(train, "--dataset", "dataset", "Dataset file written by 'ingest'");
  add_data_flags(train, train_o, train_directed, train_weighted);
  add_model_flags(train, train_o);
  train_o.bind(train, "--out", "out", "Output directory (checkpoint.nohg, metrics.jsonl)");
  train->add_flag("--grid", grid, "Search the learning-rate x beta grid and keep the best validation F1");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split of a dataset");
  std::string checkpoint;
  std::string dataset;
  std::string split = "test";
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by 'train'")->required();
  eval->add_option("--dataset", dataset, "Dataset file written by 'ingest'")->required();
  eval->add_option("--split", split, "Split to evaluate: train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}));

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare tape gradients with central differences on a tiny model");
  std::string gc_transform = "identity";
  std::uint64_t gc_seed = 7;
  bool inject_fault = false;
  gradcheck->add_option("--transform", gc_transform, "Mode-3 transform: identity or dct")
      ->check(CLI::IsMember({"identity", "dct"}));
  gradcheck->add_option("--seed", gc_seed, "Seed of the tiny instance");
  gradcheck->add_flag("--inject-fault", inject_fault,
                      "Test only: corrupt one backward rule so the check must fail");

  CLI11_PARSE(app, argc, argv);

  if (*ingest) {
    return run_guarded([&] {
      if (!ingest_o.values.count("out") && ingest_cfg.empty()) ingest_o.values["out"] = ".";
      return nohgnn::cmd_ingest(build_config(ingest_cfg, ingest_o, ingest_directed, ingest_weighted), std::cout,
                                std::cerr);
    });
  }
  if (*train) {
    return run_guarded([&] {
      auto cfg = build_config(train_cfg, train_o, train_directed, train_weighted);
      if (grid) cfg.grid = true;
      return nohgnn::cmd_train(cfg, std::cout, std::cerr);
    });
  }
  if (*eval) {
    return run_guarded([&] {
      return nohgnn::cmd_eval(checkpoint, dataset, nohgnn::parse_role(split), std::cout, std::cerr);
    });
  }
  if (*gradcheck) {
    return run_guarded([&] {
      return nohgnn::cmd_gradcheck(nohgnn::parse_transform_kind(gc_transform), gc_seed, inject_fault, std::cout,
                                   std::cerr);
    });
  }
  return 0;
}
