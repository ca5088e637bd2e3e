#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nohgnn/tensor.hpp"

namespace nohgnn {

// One timestamped interaction; endpoints are dense node indices.
struct EdgeEvent {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::int64_t timestamp = 0;
  std::optional<double> weight;
};

enum class EdgeColumn { src, dst, timestamp, weight, skip };

struct EdgeListFormat {
  // Column order of each line. A trailing weight column may be absent.
  std::vector<EdgeColumn> columns{EdgeColumn::src, EdgeColumn::dst, EdgeColumn::timestamp, EdgeColumn::weight};

  // Parses "src,dst,ts,weight" style column lists; "_" skips a column.
  static EdgeListFormat parse(const std::string& spec);
  std::string to_string() const;
};

struct EdgeList {
  std::vector<EdgeEvent> events;
  // Dense index -> external id, in order of first appearance.
  std::vector<std::int64_t> id_map;

  std::size_t node_count() const { return id_map.size(); }
};

EdgeList load_edge_list(const std::filesystem::path& path, const EdgeListFormat& format = {});
EdgeList parse_edge_list(std::istream& in, const EdgeListFormat& format = {},
                         const std::string& source = "<stream>");

struct Edge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Snapshot sequence over a shared node set. Slot edge lists are sorted and
// unique; for undirected graphs each edge is stored once with i < j while the
// adjacency is symmetric.
class DynamicGraph {
 public:
  DynamicGraph() = default;
  DynamicGraph(std::size_t nodes, std::size_t slots, bool undirected, std::vector<std::vector<Edge>> slot_edges,
               std::vector<std::vector<double>> slot_weights = {});

  std::size_t node_count() const { return nodes_; }
  std::size_t slot_count() const { return slot_edges_.size(); }
  bool undirected() const { return undirected_; }

  const std::vector<Edge>& edges(std::size_t t) const { return slot_edges_[t]; }
  const std::vector<std::vector<Edge>>& slot_edges() const { return slot_edges_; }
  const std::vector<std::vector<double>>& slot_weights() const { return slot_weights_; }
  const SliceSparse3& adjacency() const { return adjacency_; }
  std::size_t edge_count() const;
  std::size_t non_empty_slots() const;

  bool has_edge(std::uint32_t i, std::uint32_t j, std::size_t t) const;
  // (min, max) for undirected graphs, unchanged otherwise.
  Edge canonical(std::uint32_t i, std::uint32_t j) const;

  std::vector<std::int64_t> id_map;
  std::size_t event_count = 0;
  std::vector<std::string> diagnostics;

 private:
  std::size_t nodes_ = 0;
  bool undirected_ = true;
  std::vector<std::vector<Edge>> slot_edges_;
  std::vector<std::vector<double>> slot_weights_;
  SliceSparse3 adjacency_;
};

// Slot index = floor(T * (ts - ts_min) / (ts_max - ts_min + 1)). Self-loops are
// dropped. With `binarize`, duplicates collapse to a unit entry; otherwise
// their weights (1 when absent) accumulate.
DynamicGraph bin_snapshots(const EdgeList& edges, std::size_t T, bool undirected = true, bool binarize = true);
std::size_t slot_of(std::int64_t ts, std::int64_t ts_min, std::int64_t ts_max, std::size_t T);

enum class Role : std::uint8_t { train = 0, val = 1, test = 2 };
std::string to_string(Role role);
Role parse_role(const std::string& name);

struct LabeledPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint32_t t = 0;
  std::uint8_t y = 0;
  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct LabeledPairSet {
  Role role = Role::train;
  std::vector<LabeledPair> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  friend bool operator==(const LabeledPairSet&, const LabeledPairSet&) = default;
};

// Concatenation preserving order: a's entries then b's.
LabeledPairSet merge(const LabeledPairSet& a, const LabeledPairSet& b);

struct SplitResult {
  LabeledPairSet train;
  LabeledPairSet val;
  LabeledPairSet test;
  // Graph holding only the training positives; drives message passing.
  DynamicGraph masked;
  std::vector<std::string> diagnostics;
};

// Per-slot random edge split. Slots with fewer than 3 edges go to train.
SplitResult split_edges(const DynamicGraph& g, std::array<double, 3> fractions = {0.7, 0.2, 0.1},
                        std::uint64_t seed = 0);

// `ratio` corrupted-tail negatives per positive, never an observed edge of `g`
// at the same slot and never repeated.
LabeledPairSet negative_sample(const DynamicGraph& g, const LabeledPairSet& positives, std::size_t ratio,
                               std::uint64_t seed);

// Two-community stochastic block graph, sampled independently per slot.
// Nodes [0, N/2) form the first community.
DynamicGraph planted_partition(std::size_t nodes, std::size_t slots, double p_in, double p_out,
                               std::uint64_t seed);

// Ingested graph plus its frozen split and evaluation negatives.
struct Dataset {
  DynamicGraph graph;
  SplitResult split;
  LabeledPairSet val_negatives;
  LabeledPairSet test_negatives;
  std::uint64_t seed = 0;
  std::size_t neg_ratio = 1;

  // Positives followed by negatives for the requested role (train has no
  // frozen negatives, only its positives are returned).
  LabeledPairSet labeled(Role role) const;
  std::uint64_t fingerprint() const;
};

Dataset prepare_dataset(DynamicGraph graph, std::uint64_t seed, std::size_t neg_ratio = 1,
                        std::array<double, 3> fractions = {0.7, 0.2, 0.1});

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace nohgnn
