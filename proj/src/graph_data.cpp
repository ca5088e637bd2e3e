#include "nohgnn/graph_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nohgnn/container.hpp"
#include "nohgnn/errors.hpp"
#include "nohgnn/rng.hpp"

namespace nohgnn {

// ---------------------------------------------------------------------------
// Edge-list parsing

EdgeListFormat EdgeListFormat::parse(const std::string& spec) {
  EdgeListFormat fmt;
  fmt.columns.clear();
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "src") {
      fmt.columns.push_back(EdgeColumn::src);
    } else if (tok == "dst") {
      fmt.columns.push_back(EdgeColumn::dst);
    } else if (tok == "ts" || tok == "time" || tok == "timestamp") {
      fmt.columns.push_back(EdgeColumn::timestamp);
    } else if (tok == "weight" || tok == "w") {
      fmt.columns.push_back(EdgeColumn::weight);
    } else if (tok == "_" || tok == "skip") {
      fmt.columns.push_back(EdgeColumn::skip);
    } else {
      throw ParameterError("unknown edge-list column '" + tok + "' (expected src, dst, ts, weight or _)");
    }
  }
  auto count = [&](EdgeColumn c) { return std::count(fmt.columns.begin(), fmt.columns.end(), c); };
  if (count(EdgeColumn::src) != 1 || count(EdgeColumn::dst) != 1 || count(EdgeColumn::timestamp) != 1 ||
      count(EdgeColumn::weight) > 1) {
    throw ParameterError("edge-list columns need exactly one src, dst and ts and at most one weight: '" + spec + "'");
  }
  return fmt;
}

std::string EdgeListFormat::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (k) out += ',';
    switch (columns[k]) {
      case EdgeColumn::src: out += "src"; break;
      case EdgeColumn::dst: out += "dst"; break;
      case EdgeColumn::timestamp: out += "ts"; break;
      case EdgeColumn::weight: out += "weight"; break;
      case EdgeColumn::skip: out += "_"; break;
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (k < line.size()) {
    while (k < line.size() && is_sep(line[k])) ++k;
    const std::size_t start = k;
    while (k < line.size() && !is_sep(line[k])) ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const char* what, const std::string& source, std::size_t line_no) {
  T v{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(source + ":" + std::to_string(line_no) + ": invalid " + what + " '" + std::string(field) + "'",
                     line_no);
  }
  return v;
}

}  // namespace

EdgeList parse_edge_list(std::istream& in, const EdgeListFormat& format, const std::string& source) {
  EdgeList out;
  std::unordered_map<std::int64_t, std::uint32_t> dense;
  auto intern = [&](std::int64_t ext) {
    auto [it, inserted] = dense.try_emplace(ext, static_cast<std::uint32_t>(out.id_map.size()));
    if (inserted) out.id_map.push_back(ext);
    return it->second;
  };
  // Lines may omit a trailing weight column.
  std::size_t required = format.columns.size();
  if (!format.columns.empty() && format.columns.back() == EdgeColumn::weight) --required;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    const auto first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || view[first] == '#') continue;
    const auto fields = split_fields(view);
    if (fields.size() < required || fields.size() > format.columns.size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(required) +
                           (required == format.columns.size() ? "" : "-" + std::to_string(format.columns.size())) +
                           " fields (" + format.to_string() + "), got " + std::to_string(fields.size()),
                       line_no);
    }
    std::int64_t src = 0;
    std::int64_t dst = 0;
    EdgeEvent ev;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      switch (format.columns[c]) {
        case EdgeColumn::src: src = parse_number<std::int64_t>(fields[c], "source id", source, line_no); break;
        case EdgeColumn::dst: dst = parse_number<std::int64_t>(fields[c], "target id", source, line_no); break;
        case EdgeColumn::timestamp:
          ev.timestamp = parse_number<std::int64_t>(fields[c], "timestamp", source, line_no);
          break;
        case EdgeColumn::weight: {
          const double w = parse_number<double>(fields[c], "weight", source, line_no);
          if (!std::isfinite(w)) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": non-finite weight", line_no);
          }
          ev.weight = w;
          break;
        }
        case EdgeColumn::skip: break;
      }
    }
    ev.src = intern(src);
    ev.dst = intern(dst);
    out.events.push_back(ev);
  }
  if (out.events.empty()) throw EmptyInputError(source + ": no edge events");
  return out;
}

EdgeList load_edge_list(const std::filesystem::path& path, const EdgeListFormat& format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path.string() + "'");
  return parse_edge_list(in, format, path.string());
}

// ---------------------------------------------------------------------------
// Snapshots

DynamicGraph::DynamicGraph(std::size_t nodes, std::size_t slots, bool undirected,
                           std::vector<std::vector<Edge>> slot_edges, std::vector<std::vector<double>> slot_weights)
    : nodes_(nodes), undirected_(undirected) {
  if (slot_edges.size() != slots) throw ShapeError("DynamicGraph: slot edge lists do not match slot count");
  const bool weighted = !slot_weights.empty();
  if (weighted && slot_weights.size() != slots) throw ShapeError("DynamicGraph: weight lists do not match");
  slot_edges_.resize(slots);
  if (weighted) slot_weights_.resize(slots);
  std::vector<CsrMatrix> adj;
  adj.reserve(slots);
  for (std::size_t t = 0; t < slots; ++t) {
    std::vector<std::pair<Edge, double>> items;
    items.reserve(slot_edges[t].size());
    for (std::size_t k = 0; k < slot_edges[t].size(); ++k) {
      const Edge& e = slot_edges[t][k];
      if (e.i >= nodes || e.j >= nodes) throw ShapeError("DynamicGraph: edge endpoint out of range");
      if (e.i == e.j) continue;
      items.emplace_back(canonical(e.i, e.j), weighted ? slot_weights[t].at(k) : 1.0);
    }
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Triplet> trip;
    trip.reserve(items.size() * 2);
    for (std::size_t k = 0; k < items.size();) {
      const Edge e = items[k].first;
      double w = 0.0;
      for (; k < items.size() && items[k].first == e; ++k) w = weighted ? w + items[k].second : 1.0;
      slot_edges_[t].push_back(e);
      if (weighted) slot_weights_[t].push_back(w);
      trip.push_back({e.i, e.j, w});
      if (undirected_) trip.push_back({e.j, e.i, w});
    }
    adj.push_back(CsrMatrix::from_triplets(nodes, nodes, std::move(trip)));
  }
  adjacency_ = SliceSparse3(nodes, nodes, std::move(adj));
}

Edge DynamicGraph::canonical(std::uint32_t i, std::uint32_t j) const {
  if (undirected_ && j < i) return Edge{j, i};
  return Edge{i, j};
}

bool DynamicGraph::has_edge(std::uint32_t i, std::uint32_t j, std::size_t t) const {
  const auto& es = slot_edges_[t];
  return std::binary_search(es.begin(), es.end(), canonical(i, j));
}

std::size_t DynamicGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& es : slot_edges_) n += es.size();
  return n;
}

std::size_t DynamicGraph::non_empty_slots() const {
  return static_cast<std::size_t>(
      std::count_if(slot_edges_.begin(), slot_edges_.end(), [](const auto& es) { return !es.empty(); }));
}

std::size_t slot_of(std::int64_t ts, std::int64_t ts_min, std::int64_t ts_max, std::size_t T) {
  const __int128 num = static_cast<__int128>(T) * (static_cast<__int128>(ts) - ts_min);
  const __int128 den = static_cast<__int128>(ts_max) - ts_min + 1;
  return static_cast<std::size_t>(num / den);
}

DynamicGraph bin_snapshots(const EdgeList& edges, std::size_t T, bool undirected, bool binarize) {
  if (T == 0) throw ParameterError("bin_snapshots: slot count must be at least 1");
  if (edges.events.empty()) throw EmptyInputError("bin_snapshots: no events");
  const auto [lo, hi] = std::minmax_element(edges.events.begin(), edges.events.end(),
                                            [](const EdgeEvent& a, const EdgeEvent& b) {
                                              return a.timestamp < b.timestamp;
                                            });
  const std::int64_t ts_min = lo->timestamp;
  const std::int64_t ts_max = hi->timestamp;
  std::vector<std::string> notes;
  if (ts_min == ts_max && T > 1) {
    notes.push_back("all timestamps are equal; every event lands in slot 0");
  }
  std::vector<std::vector<Edge>> slots(T);
  std::vector<std::vector<double>> weights(binarize ? 0 : T);
  std::size_t self_loops = 0;
  for (const auto& ev : edges.events) {
    if (ev.src == ev.dst) {
      ++self_loops;
      continue;
    }
    const std::size_t t = slot_of(ev.timestamp, ts_min, ts_max, T);
    slots[t].push_back(Edge{ev.src, ev.dst});
    if (!binarize) weights[t].push_back(ev.weight.value_or(1.0));
  }
  if (self_loops) notes.push_back("dropped " + std::to_string(self_loops) + " self-loop events");
  DynamicGraph g(edges.node_count(), T, undirected, std::move(slots), std::move(weights));
  g.id_map = edges.id_map;
  g.event_count = edges.events.size();
  g.diagnostics = std::move(notes);
  return g;
}

// ---------------------------------------------------------------------------
// Splits and negatives

std::string to_string(Role role) {
  switch (role) {
    case Role::train: return "train";
    case Role::val: return "val";
    case Role::test: return "test";
  }
  return "unknown";
}

Role parse_role(const std::string& name) {
  if (name == "train") return Role::train;
  if (name == "val" || name == "validation") return Role::val;
  if (name == "test") return Role::test;
  throw ParameterError("unknown split '" + name + "' (expected train, val or test)");
}

LabeledPairSet merge(const LabeledPairSet& a, const LabeledPairSet& b) {
  LabeledPairSet out{a.role, a.entries};
  out.entries.insert(out.entries.end(), b.entries.begin(), b.entries.end());
  return out;
}

SplitResult split_edges(const DynamicGraph& g, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0)) throw ParameterError("split_edges: fractions must be positive");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ParameterError("split_edges: fractions must sum to 1");
  }
  SplitResult out;
  out.train.role = Role::train;
  out.val.role = Role::val;
  out.test.role = Role::test;
  std::mt19937_64 rng(seed);
  const std::size_t T = g.slot_count();
  const bool weighted = !g.slot_weights().empty();
  std::vector<std::vector<Edge>> kept(T);
  std::vector<std::vector<double>> kept_w(weighted ? T : 0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& es = g.edges(t);
    std::vector<std::size_t> order(es.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::size_t n_train = es.size();
    std::size_t n_val = 0;
    if (es.size() < 3) {
      if (!es.empty()) {
        out.diagnostics.push_back("slot " + std::to_string(t) + " has " + std::to_string(es.size()) +
                                  " edges; all assigned to train");
      }
    } else {
      std::shuffle(order.begin(), order.end(), rng);
      const double n = static_cast<double>(es.size());
      n_val = static_cast<std::size_t>(std::llround(fractions[1] * n));
      const auto n_test = static_cast<std::size_t>(std::llround(fractions[2] * n));
      n_train = es.size() - n_val - n_test;
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Edge& e = es[order[k]];
      const LabeledPair lp{e.i, e.j, static_cast<std::uint32_t>(t), 1};
      if (k < n_train) {
        out.train.entries.push_back(lp);
        kept[t].push_back(e);
        if (weighted) kept_w[t].push_back(g.slot_weights()[t][order[k]]);
      } else if (k < n_train + n_val) {
        out.val.entries.push_back(lp);
      } else {
        out.test.entries.push_back(lp);
      }
    }
  }
  auto by_slot = [](const LabeledPair& a, const LabeledPair& b) {
    return std::tie(a.t, a.i, a.j) < std::tie(b.t, b.i, b.j);
  };
  std::sort(out.train.entries.begin(), out.train.entries.end(), by_slot);
  std::sort(out.val.entries.begin(), out.val.entries.end(), by_slot);
  std::sort(out.test.entries.begin(), out.test.entries.end(), by_slot);
  out.masked = DynamicGraph(g.node_count(), T, g.undirected(), std::move(kept), std::move(kept_w));
  out.masked.id_map = g.id_map;
  out.masked.event_count = g.event_count;
  return out;
}

LabeledPairSet negative_sample(const DynamicGraph& g, const LabeledPairSet& positives, std::size_t ratio,
                               std::uint64_t seed) {
  if (ratio < 1) throw ParameterError("negative_sample: ratio must be at least 1");
  const std::uint64_t N = g.node_count();
  if (N < 2) throw SamplingError("negative_sample: need at least two nodes");
  LabeledPairSet out;
  out.role = positives.role;
  out.entries.reserve(positives.size() * ratio);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick_other(0, N - 2);
  std::unordered_set<std::uint64_t> used;
  auto key = [N](std::uint64_t t, const Edge& e) { return (t * N + e.i) * N + e.j; };
  auto admissible = [&](std::uint32_t a, std::uint32_t b, std::size_t t) {
    return a != b && !g.has_edge(a, b, t) && !used.count(key(t, g.canonical(a, b)));
  };
  auto emit = [&](std::uint32_t a, std::uint32_t b, std::uint32_t t) {
    const Edge e = g.canonical(a, b);
    used.insert(key(t, e));
    out.entries.push_back(LabeledPair{e.i, e.j, t, 0});
  };
  constexpr int kRandomAttempts = 64;
  std::vector<std::uint32_t> candidates;
  std::vector<Edge> fallback;
  for (const auto& pos : positives.entries) {
    if (pos.t >= g.slot_count() || pos.i >= N || pos.j >= N) {
      throw ShapeError("negative_sample: positive outside graph bounds");
    }
    for (std::size_t r = 0; r < ratio; ++r) {
      const std::uint32_t anchor = pos.i;
      bool done = false;
      for (int attempt = 0; attempt < kRandomAttempts && !done; ++attempt) {
        auto other = static_cast<std::uint32_t>(pick_other(rng));
        if (other >= anchor) ++other;
        if (admissible(anchor, other, pos.t)) {
          emit(anchor, other, pos.t);
          done = true;
        }
      }
      if (done) continue;
      candidates.clear();
      for (std::uint32_t j = 0; j < N; ++j) {
        if (admissible(anchor, j, pos.t)) candidates.push_back(j);
      }
      if (!candidates.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        emit(anchor, candidates[pick(rng)], pos.t);
        continue;
      }
      // Anchor exhausted: any remaining non-edge at this slot.
      fallback.clear();
      for (std::uint32_t a = 0; a < N; ++a) {
        for (std::uint32_t b = g.undirected() ? a + 1 : 0; b < N; ++b) {
          if (admissible(a, b, pos.t)) fallback.push_back(Edge{a, b});
        }
      }
      if (fallback.empty()) {
        throw SamplingError("negative_sample: slot " + std::to_string(pos.t) + " has no unsampled non-edges left");
      }
      std::uniform_int_distribution<std::size_t> pick(0, fallback.size() - 1);
      const Edge e = fallback[pick(rng)];
      emit(e.i, e.j, pos.t);
    }
  }
  return out;
}

DynamicGraph planted_partition(std::size_t nodes, std::size_t slots, double p_in, double p_out, std::uint64_t seed) {
  if (nodes < 2 || slots == 0) throw ParameterError("planted_partition: need at least 2 nodes and 1 slot");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::size_t half = nodes / 2;
  std::vector<std::vector<Edge>> es(slots);
  std::size_t events = 0;
  for (std::size_t t = 0; t < slots; ++t) {
    for (std::uint32_t i = 0; i < nodes; ++i) {
      for (std::uint32_t j = i + 1; j < nodes; ++j) {
        const bool same = (i < half) == (j < half);
        if (coin(rng) < (same ? p_in : p_out)) es[t].push_back(Edge{i, j});
      }
    }
    events += es[t].size();
  }
  DynamicGraph g(nodes, slots, true, std::move(es));
  g.id_map.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) g.id_map[i] = static_cast<std::int64_t>(i);
  g.event_count = events;
  return g;
}

// ---------------------------------------------------------------------------
// Dataset bundle

LabeledPairSet Dataset::labeled(Role role) const {
  switch (role) {
    case Role::train: return split.train;
    case Role::val: return merge(split.val, val_negatives);
    case Role::test: return merge(split.test, test_negatives);
  }
  return {};
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 1099511628211ull;
    }
  }
};

void hash_pairs(Fnv& f, const LabeledPairSet& s) {
  f.add(s.size());
  for (const auto& p : s.entries) {
    f.add(p.i);
    f.add(p.j);
    f.add(p.t);
    f.add(p.y);
  }
}

std::vector<std::int64_t> flatten(const LabeledPairSet& s) {
  std::vector<std::int64_t> out;
  out.reserve(s.size() * 4);
  for (const auto& p : s.entries) {
    out.push_back(p.i);
    out.push_back(p.j);
    out.push_back(p.t);
    out.push_back(p.y);
  }
  return out;
}

LabeledPairSet unflatten(const Container& c, const std::string& name, Role role) {
  const Record& r = c.get(name);
  if (r.dtype != DType::int64 || r.dims.size() != 2 || r.dims[1] != 4) {
    throw FormatError("dataset: record '" + name + "' is not an n x 4 int64 table");
  }
  LabeledPairSet s;
  s.role = role;
  s.entries.resize(r.dims[0]);
  for (std::size_t k = 0; k < s.entries.size(); ++k) {
    s.entries[k] = LabeledPair{static_cast<std::uint32_t>(r.i64[4 * k]), static_cast<std::uint32_t>(r.i64[4 * k + 1]),
                               static_cast<std::uint32_t>(r.i64[4 * k + 2]),
                               static_cast<std::uint8_t>(r.i64[4 * k + 3])};
  }
  return s;
}

}  // namespace

std::uint64_t Dataset::fingerprint() const {
  Fnv f;
  f.add(graph.node_count());
  f.add(graph.slot_count());
  f.add(graph.undirected() ? 1 : 0);
  for (std::size_t t = 0; t < graph.slot_count(); ++t) {
    f.add(graph.edges(t).size());
    for (const auto& e : graph.edges(t)) {
      f.add(e.i);
      f.add(e.j);
    }
  }
  hash_pairs(f, split.train);
  hash_pairs(f, split.val);
  hash_pairs(f, split.test);
  hash_pairs(f, val_negatives);
  hash_pairs(f, test_negatives);
  return f.h;
}

Dataset prepare_dataset(DynamicGraph graph, std::uint64_t seed, std::size_t neg_ratio,
                        std::array<double, 3> fractions) {
  Dataset d;
  d.seed = seed;
  d.neg_ratio = neg_ratio;
  d.split = split_edges(graph, fractions, derive_seed(seed, SeedStream::split));
  d.val_negatives = negative_sample(graph, d.split.val, neg_ratio, derive_seed(seed, SeedStream::val_negatives));
  d.test_negatives = negative_sample(graph, d.split.test, neg_ratio, derive_seed(seed, SeedStream::test_negatives));
  d.graph = std::move(graph);
  return d;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  const DynamicGraph& g = data.graph;
  Container c;
  c.put_i64("dataset.meta", {6},
            {static_cast<std::int64_t>(g.node_count()), static_cast<std::int64_t>(g.slot_count()),
             g.undirected() ? 1 : 0, static_cast<std::int64_t>(data.seed), static_cast<std::int64_t>(data.neg_ratio),
             static_cast<std::int64_t>(g.event_count)});
  c.put_i64("dataset.id_map", {g.id_map.size()}, g.id_map);
  std::vector<std::int64_t> edges;
  std::vector<double> weights;
  for (std::size_t t = 0; t < g.slot_count(); ++t) {
    for (std::size_t k = 0; k < g.edges(t).size(); ++k) {
      edges.push_back(static_cast<std::int64_t>(t));
      edges.push_back(g.edges(t)[k].i);
      edges.push_back(g.edges(t)[k].j);
      weights.push_back(g.slot_weights().empty() ? 1.0 : g.slot_weights()[t][k]);
    }
  }
  c.put_i64("dataset.edges", {edges.size() / 3, 3}, edges);
  if (!g.slot_weights().empty()) c.put_f64("dataset.weights", {weights.size()}, weights);
  c.put_i64("split.train", {data.split.train.size(), 4}, flatten(data.split.train));
  c.put_i64("split.val", {data.split.val.size(), 4}, flatten(data.split.val));
  c.put_i64("split.test", {data.split.test.size(), 4}, flatten(data.split.test));
  c.put_i64("split.val_neg", {data.val_negatives.size(), 4}, flatten(data.val_negatives));
  c.put_i64("split.test_neg", {data.test_negatives.size(), 4}, flatten(data.test_negatives));
  c.save(path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  const Container c = Container::load(path);
  const auto& meta = c.ints("dataset.meta");
  if (meta.size() != 6) throw FormatError("dataset: malformed meta record");
  const auto N = static_cast<std::size_t>(meta[0]);
  const auto T = static_cast<std::size_t>(meta[1]);
  const bool undirected = meta[2] != 0;
  const auto& flat = c.ints("dataset.edges");
  const bool weighted = c.has("dataset.weights");
  const std::vector<double>* w = weighted ? &c.reals("dataset.weights") : nullptr;
  std::vector<std::vector<Edge>> slots(T);
  std::vector<std::vector<double>> slot_w(weighted ? T : 0);
  for (std::size_t k = 0; k + 2 < flat.size(); k += 3) {
    const auto t = static_cast<std::size_t>(flat[k]);
    if (t >= T) throw FormatError("dataset: edge slot out of range");
    slots[t].push_back(Edge{static_cast<std::uint32_t>(flat[k + 1]), static_cast<std::uint32_t>(flat[k + 2])});
    if (weighted) slot_w[t].push_back((*w)[k / 3]);
  }
  Dataset d;
  d.graph = DynamicGraph(N, T, undirected, std::move(slots), std::move(slot_w));
  d.graph.id_map = c.ints("dataset.id_map");
  d.graph.event_count = static_cast<std::size_t>(meta[5]);
  d.seed = static_cast<std::uint64_t>(meta[3]);
  d.neg_ratio = static_cast<std::size_t>(meta[4]);
  d.split.train = unflatten(c, "split.train", Role::train);
  d.split.val = unflatten(c, "split.val", Role::val);
  d.split.test = unflatten(c, "split.test", Role::test);
  d.val_negatives = unflatten(c, "split.val_neg", Role::val);
  d.test_negatives = unflatten(c, "split.test_neg", Role::test);
  // Rebuild the message-passing graph from the training positives.
  std::vector<std::vector<Edge>> kept(T);
  std::vector<std::vector<double>> kept_w(weighted ? T : 0);
  for (const auto& p : d.split.train.entries) {
    if (p.t >= T) throw FormatError("dataset: split entry slot out of range");
    kept[p.t].push_back(Edge{p.i, p.j});
    if (weighted) {
      const auto& es = d.graph.edges(p.t);
      const auto it = std::lower_bound(es.begin(), es.end(), Edge{p.i, p.j});
      kept_w[p.t].push_back(d.graph.slot_weights()[p.t][static_cast<std::size_t>(it - es.begin())]);
    }
  }
  d.split.masked = DynamicGraph(N, T, undirected, std::move(kept), std::move(kept_w));
  d.split.masked.id_map = d.graph.id_map;
  d.split.masked.event_count = d.graph.event_count;
  return d;
}

}  // namespace nohgnn
