#pragma once

// Loop-only reference implementation of the full model: overlap tensor,
// structural features, softmax aggregation, high-order layers and decoder.
// Works on plain nested vectors and shares no code with the library beyond
// reading parameter values.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/graph_data.hpp"

namespace naive {

using Mat = std::vector<std::vector<double>>;
using Cube = std::vector<Mat>;  // [t][row][col]

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<double>(c, 0.0)); }

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat out = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Mat slice_of(const nohgnn::Tensor3& x, std::size_t t) {
  Mat m = zeros(x.d1(), x.d2());
  for (std::size_t i = 0; i < x.d1(); ++i)
    for (std::size_t j = 0; j < x.d2(); ++j) m[i][j] = x(i, j, t);
  return m;
}

// Dense 0/1 adjacency per slot, symmetric for undirected graphs.
inline Cube adjacency(const nohgnn::DynamicGraph& g) {
  const std::size_t n = g.node_count();
  Cube a(g.slot_count(), zeros(n, n));
  for (std::size_t t = 0; t < g.slot_count(); ++t)
    for (const auto& e : g.edges(t)) {
      a[t][e.i][e.j] = 1.0;
      if (g.undirected()) a[t][e.j][e.i] = 1.0;
    }
  return a;
}

inline Cube overlap(const Cube& a, std::size_t K) {
  Cube b;
  for (const auto& at : a) {
    Mat power = at, sum = at;
    for (std::size_t k = 2; k <= K; ++k) {
      power = matmul(power, at);
      for (std::size_t i = 0; i < sum.size(); ++i)
        for (std::size_t j = 0; j < sum.size(); ++j) sum[i][j] += power[i][j];
    }
    b.push_back(sum);
  }
  return b;
}

inline std::vector<double> perceptron(const std::vector<double>& x, const nohgnn::ParamStore& ps,
                                      const std::string& prefix, bool relu_hidden) {
  const auto& w1 = ps.value(prefix + ".w1");
  const auto& b1 = ps.value(prefix + ".b1");
  const auto& w2 = ps.value(prefix + ".w2");
  const auto& b2 = ps.value(prefix + ".b2");
  std::vector<double> h(w1.d2());
  for (std::size_t c = 0; c < w1.d2(); ++c) {
    double acc = b1(0, c, 0);
    for (std::size_t r = 0; r < x.size(); ++r) acc += x[r] * w1(r, c, 0);
    h[c] = relu_hidden ? std::max(acc, 0.0) : acc;
  }
  std::vector<double> out(w2.d2());
  for (std::size_t c = 0; c < w2.d2(); ++c) {
    double acc = b2(0, c, 0);
    for (std::size_t r = 0; r < h.size(); ++r) acc += h[r] * w2(r, c, 0);
    out[c] = acc;
  }
  return out;
}

// Aggregation weights P as dense cubes; zero outside supp(B) plus diagonal.
inline Cube aggregation(const Cube& b, const nohgnn::ParamStore& ps, std::size_t F) {
  const std::size_t n = b[0].size();
  Cube p(b.size(), zeros(n, n));
  for (std::size_t t = 0; t < b.size(); ++t) {
    Mat o = zeros(n, F);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> acc(F, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (b[t][i][j] == 0.0) continue;
        const auto e = perceptron({b[t][i][j]}, ps, "gen.edge", true);
        for (std::size_t f = 0; f < F; ++f) acc[f] += e[f];
      }
      o[i] = perceptron(acc, ps, "gen.theta", true);
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> cols;
      for (std::size_t j = 0; j < n; ++j)
        if (b[t][i][j] != 0.0 || i == j) cols.push_back(j);
      std::vector<double> score;
      double hi = -INFINITY;
      for (std::size_t j : cols) {
        double s = 0.0;
        for (std::size_t f = 0; f < F; ++f) s += o[i][f] * o[j][f];
        score.push_back(s);
        hi = std::max(hi, s);
      }
      double z = 0.0;
      for (double& s : score) z += (s = std::exp(s - hi));
      for (std::size_t k = 0; k < cols.size(); ++k) p[t][i][cols[k]] = score[k] / z;
    }
  }
  return p;
}

// x(:,:,t) -> sum_s M(t,s) x(:,:,s)
inline Cube tube_transform(const Cube& x, const nohgnn::Matrix& m) {
  Cube out(x.size(), zeros(x[0].size(), x[0][0].size()));
  for (std::size_t t = 0; t < x.size(); ++t)
    for (std::size_t s = 0; s < x.size(); ++s)
      for (std::size_t i = 0; i < x[0].size(); ++i)
        for (std::size_t j = 0; j < x[0][0].size(); ++j) out[t][i][j] += m(t, s) * x[s][i][j];
  return out;
}

inline Cube mprod(const Cube& x, const Cube& y, const nohgnn::Matrix& m, const nohgnn::Matrix& minv) {
  const Cube xh = tube_transform(x, m);
  const Cube yh = tube_transform(y, m);
  Cube z;
  for (std::size_t t = 0; t < x.size(); ++t) z.push_back(matmul(xh[t], yh[t]));
  return tube_transform(z, minv);
}

inline Cube layers(const Cube& p, const nohgnn::ParamStore& ps, std::size_t L, const nohgnn::Matrix& m,
                   const nohgnn::Matrix& minv) {
  const std::size_t T = p.size();
  const Mat e = slice_of(ps.value("embed.E"), 0);
  Cube h(T, e);
  for (std::size_t l = 1; l <= L; ++l) {
    const auto& w = ps.value("layer" + std::to_string(l) + ".W");
    Cube wc;
    for (std::size_t t = 0; t < T; ++t) wc.push_back(slice_of(w, t));
    h = mprod(mprod(p, h, m, minv), wc, m, minv);
    if (l < L)
      for (auto& s : h)
        for (auto& row : s)
          for (double& v : row) v = std::max(v, 0.0);
  }
  return h;
}

inline std::vector<double> decode(const Cube& h, const nohgnn::LabeledPairSet& pairs, const nohgnn::ParamStore& ps) {
  std::vector<double> out;
  for (const auto& pr : pairs.entries) {
    std::vector<double> x = h[pr.t][pr.i];
    x.insert(x.end(), h[pr.t][pr.j].begin(), h[pr.t][pr.j].end());
    const double logit = perceptron(x, ps, "dec", true)[0];
    out.push_back(1.0 / (1.0 + std::exp(-logit)));
  }
  return out;
}

inline std::vector<double> predict(const nohgnn::DynamicGraph& masked, const nohgnn::ParamStore& ps,
                                   const nohgnn::LabeledPairSet& pairs, std::size_t K, std::size_t L, std::size_t F,
                                   const nohgnn::Matrix& m, const nohgnn::Matrix& minv) {
  const Cube p = aggregation(overlap(adjacency(masked), K), ps, F);
  return decode(layers(p, ps, L, m, minv), pairs, ps);
}

}  // namespace naive
