#include "nohgnn/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "nohgnn/errors.hpp"

namespace nohgnn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParameterError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "edges", "dataset", "columns", "slots", "undirected", "binarize", "out", "grid",
      "lr", "beta", "epochs", "patience", "k_hops", "layers", "dim", "transform", "seed", "neg_ratio", "threshold"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "edges") {
    edges = value;
  } else if (key == "dataset") {
    dataset = value;
  } else if (key == "columns") {
    EdgeListFormat::parse(value);
    columns = value;
  } else if (key == "slots") {
    slots = to_count(key, value);
  } else if (key == "undirected") {
    undirected = to_bool(key, value);
  } else if (key == "binarize") {
    binarize = to_bool(key, value);
  } else if (key == "out") {
    out = value;
  } else if (key == "grid") {
    grid = to_bool(key, value);
  } else if (key == "lr") {
    train.learning_rate = to_real(key, value);
  } else if (key == "beta") {
    train.beta_reg = to_real(key, value);
  } else if (key == "epochs") {
    train.max_epochs = to_count(key, value);
  } else if (key == "patience") {
    train.patience = to_count(key, value);
  } else if (key == "k_hops") {
    train.hops = to_count(key, value);
  } else if (key == "layers") {
    train.layers = to_count(key, value);
  } else if (key == "dim") {
    train.dim = to_count(key, value);
  } else if (key == "transform") {
    train.transform = parse_transform_kind(value);
    if (train.transform == TransformKind::custom) throw ParameterError("transform: expected identity or dct");
  } else if (key == "seed") {
    train.seed = to_count(key, value);
  } else if (key == "neg_ratio") {
    train.neg_ratio = to_count(key, value);
  } else if (key == "threshold") {
    train.threshold = to_real(key, value);
  } else {
    throw ParameterError("unknown configuration key '" + key + "'");
  }
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const ParameterError& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  return parse_run_config(in, path.string());
}

}  // namespace nohgnn
