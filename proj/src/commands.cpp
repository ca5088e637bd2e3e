#include "nohgnn/commands.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "nohgnn/errors.hpp"

namespace nohgnn {

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

void print_diagnostics(const std::vector<std::string>& notes, std::ostream& err) {
  for (const auto& n : notes) err << "note: " << n << "\n";
}

}  // namespace

std::string metrics_json(const Metrics& m, const std::string& split) {
  nlohmann::ordered_json j;
  j["split"] = split;
  j["f1"] = round4(m.f1);
  j["accuracy"] = round4(m.accuracy);
  j["loss"] = round4(m.loss);
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j.dump();
}

Dataset dataset_from_config(const RunConfig& cfg) {
  if (!cfg.dataset.empty()) return load_dataset(cfg.dataset);
  if (cfg.edges.empty()) throw ParameterError("dataset: give a dataset file (--dataset) or an edge list (--edges)");
  if (cfg.slots == 0) throw ParameterError("slots: required when ingesting an edge list");
  if (!std::filesystem::exists(cfg.edges)) throw Error("edge list '" + cfg.edges + "' does not exist");
  const EdgeList edges = load_edge_list(cfg.edges, EdgeListFormat::parse(cfg.columns));
  DynamicGraph g = bin_snapshots(edges, cfg.slots, cfg.undirected, cfg.binarize);
  return prepare_dataset(std::move(g), cfg.train.seed, cfg.train.neg_ratio);
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.edges.empty()) throw ParameterError("edges: an edge-list path is required");
    if (cfg.slots == 0) throw ParameterError("slots: must be at least 1");
    if (cfg.train.neg_ratio < 1) throw ParameterError("neg_ratio: must be at least 1");
    if (!std::filesystem::exists(cfg.edges)) throw Error("edge list '" + cfg.edges + "' does not exist");
    const EdgeList edges = load_edge_list(cfg.edges, EdgeListFormat::parse(cfg.columns));
    DynamicGraph g = bin_snapshots(edges, cfg.slots, cfg.undirected, cfg.binarize);
    print_diagnostics(g.diagnostics, err);
    const Dataset data = prepare_dataset(std::move(g), cfg.train.seed, cfg.train.neg_ratio);
    print_diagnostics(data.split.diagnostics, err);
    std::filesystem::create_directories(cfg.out);
    const auto path = std::filesystem::path(cfg.out) / kDatasetFile;
    save_dataset(data, path);
    out << "nodes=" << data.graph.node_count() << " edges=" << data.graph.event_count
        << " slots=" << data.graph.slot_count() << "\n";
    out << "distinct_edges=" << data.graph.edge_count() << " non_empty_slots=" << data.graph.non_empty_slots()
        << " train=" << data.split.train.size() << " val=" << data.split.val.size()
        << " test=" << data.split.test.size() << "\n";
    out << "wrote " << path.string() << "\n";
    return 0;
  });
}

Container make_checkpoint(const ParamStore& params, const ModelConfig& model, const TrainConfig& train,
                          std::uint64_t dataset_fingerprint, const TrainResult& result) {
  Container c;
  c.put_i64("meta.model", {7},
            {static_cast<std::int64_t>(model.nodes), static_cast<std::int64_t>(model.dim),
             static_cast<std::int64_t>(model.slots), static_cast<std::int64_t>(model.layers),
             static_cast<std::int64_t>(model.hops), static_cast<std::int64_t>(model.transform),
             model.linear ? 1 : 0});
  c.put_i64("meta.dataset", {1}, {std::bit_cast<std::int64_t>(dataset_fingerprint)});
  c.put_i64("meta.run", {4},
            {static_cast<std::int64_t>(train.seed), static_cast<std::int64_t>(train.neg_ratio),
             static_cast<std::int64_t>(result.best_epoch), static_cast<std::int64_t>(result.epochs_run)});
  c.put_f64("meta.train", {7},
            {train.learning_rate, train.beta_reg, train.threshold, result.best_val.f1, result.best_val.accuracy,
             result.test.f1, result.test.accuracy});
  for (const auto& [name, e] : params.entries()) c.put_tensor("param." + name, e.value);
  return c;
}

LoadedCheckpoint read_checkpoint(const Container& c) {
  const auto& m = c.ints("meta.model");
  if (m.size() != 7) throw FormatError("checkpoint: malformed meta.model record");
  LoadedCheckpoint out;
  out.model.nodes = static_cast<std::size_t>(m[0]);
  out.model.dim = static_cast<std::size_t>(m[1]);
  out.model.slots = static_cast<std::size_t>(m[2]);
  out.model.layers = static_cast<std::size_t>(m[3]);
  out.model.hops = static_cast<std::size_t>(m[4]);
  if (m[5] < 0 || m[5] > 1) throw FormatError("checkpoint: unsupported transform tag");
  out.model.transform = static_cast<TransformKind>(m[5]);
  out.model.linear = m[6] != 0;
  out.dataset_fingerprint = std::bit_cast<std::uint64_t>(c.ints("meta.dataset").at(0));
  out.threshold = c.reals("meta.train").at(2);
  for (const auto& r : c.records()) {
    if (r.name.rfind("param.", 0) == 0) out.params.add(r.name.substr(6), c.tensor(r.name));
  }
  return out;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.train.validate();
    Dataset data = dataset_from_config(cfg);
    print_diagnostics(data.split.diagnostics, err);
    std::filesystem::create_directories(cfg.out);
    const auto out_dir = std::filesystem::path(cfg.out);

    TrainResult result;
    TrainConfig chosen = cfg.train;
    if (cfg.grid) {
      GridResult grid = grid_search(data, cfg.train, kLearningRateGrid, kBetaGrid);
      std::ofstream summary(out_dir / "grid.jsonl");
      for (const auto& e : grid.entries) {
        nlohmann::ordered_json j;
        j["lr"] = e.learning_rate;
        j["beta"] = e.beta_reg;
        j["best_epoch"] = e.best_epoch;
        j["val_f1"] = e.best_val.f1;
        j["val_acc"] = e.best_val.accuracy;
        j["test_f1"] = e.test.f1;
        j["test_acc"] = e.test.accuracy;
        summary << j.dump() << "\n";
      }
      chosen.learning_rate = grid.entries[grid.best].learning_rate;
      chosen.beta_reg = grid.entries[grid.best].beta_reg;
      result = std::move(grid.best_run);
      out << "grid best lr=" << chosen.learning_rate << " beta=" << chosen.beta_reg << "\n";
    } else {
      result = train_loop(data, cfg.train);
    }

    {
      std::ofstream log(out_dir / kMetricsFile, std::ios::trunc);
      if (!log) throw Error("cannot write '" + (out_dir / kMetricsFile).string() + "'");
      for (const auto& e : result.history) log << to_json_line(e) << "\n";
    }
    const ModelConfig mc = chosen.model_config(data.graph);
    make_checkpoint(result.best_params, mc, chosen, data.fingerprint(), result).save(out_dir / kCheckpointFile);

    out << "epochs=" << result.epochs_run << " best_epoch=" << result.best_epoch << " stop=" << result.stop_reason
        << " val_f1=" << fixed4(result.best_val.f1) << "\n";
    out << "test f1=" << fixed4(result.test.f1) << " accuracy=" << fixed4(result.test.accuracy) << "\n";
    out << metrics_json(result.test, "test") << "\n";
    return 0;
  });
}

int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, Role split,
             std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedCheckpoint ckpt = read_checkpoint(Container::load(checkpoint));
    const Dataset data = load_dataset(dataset);
    const bool shape_ok = ckpt.model.nodes == data.graph.node_count() &&
                          ckpt.model.slots == data.graph.slot_count() &&
                          ckpt.params.contains("embed.E") && ckpt.params.value("embed.E").d2() == ckpt.model.dim;
    if (!shape_ok || ckpt.dataset_fingerprint != data.fingerprint()) {
      throw MismatchError("checkpoint/dataset mismatch: checkpoint expects N=" + std::to_string(ckpt.model.nodes) +
                          " T=" + std::to_string(ckpt.model.slots) + ", dataset has N=" +
                          std::to_string(data.graph.node_count()) + " T=" + std::to_string(data.graph.slot_count()) +
                          (shape_ok ? " (different edges or split)" : ""));
    }
    const auto overlap =
        std::make_shared<const SliceSparse3>(compute_overlap_tensor(data.split.masked, ckpt.model.hops));
    const NoHgnn model(ckpt.model, overlap);
    const Metrics m = evaluate_split(data, model, ckpt.params, split, ckpt.threshold);
    out << metrics_json(m, to_string(split)) << "\n";
    return 0;
  });
}

int cmd_gradcheck(TransformKind transform, std::uint64_t seed, bool inject_fault, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    if (inject_fault) ad::testing::set_fault(ad::testing::Fault::matmul_rhs);
    GradCheckReport report;
    try {
      report = tiny_gradcheck(transform, seed);
    } catch (...) {
      ad::testing::set_fault(ad::testing::Fault::none);
      throw;
    }
    ad::testing::set_fault(ad::testing::Fault::none);
    constexpr double kTolerance = 1e-4;
    const bool pass = report.max_rel_error <= kTolerance;
    std::ostringstream rel;
    rel << std::scientific << std::setprecision(6) << report.max_rel_error;
    out << "transform=" << to_string(transform) << " entries=" << report.entries_checked
        << " max_rel_error=" << rel.str() << " worst=" << report.worst_param << "[" << report.worst_index << "]"
        << " " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 3;
  });
}

}  // namespace nohgnn
