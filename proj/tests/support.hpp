#pragma once

// Shared generators for the unit tests. Nothing here calls library code that
// a test is meant to check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nohgnn/tensor.hpp"

namespace testsupport {

inline nohgnn::Tensor3 random_tensor(std::size_t d1, std::size_t d2, std::size_t d3, std::mt19937_64& rng,
                                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  nohgnn::Tensor3 t(d1, d2, d3);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

inline nohgnn::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nohgnn::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

// Random symmetric 0/1 adjacency without self-loops, one per slot.
inline std::vector<std::vector<std::vector<int>>> random_adjacency(std::size_t n, std::size_t slots, double p,
                                                                   std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::vector<std::vector<int>>> a(slots, std::vector<std::vector<int>>(n, std::vector<int>(n, 0)));
  for (auto& s : a)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng)) s[i][j] = s[j][i] = 1;
  return a;
}

inline nohgnn::SliceSparse3 to_sparse(const std::vector<std::vector<std::vector<int>>>& a) {
  const std::size_t n = a.empty() ? 0 : a[0].size();
  std::vector<nohgnn::CsrMatrix> slices;
  for (const auto& s : a) {
    std::vector<nohgnn::Triplet> trip;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (s[i][j]) trip.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0});
    slices.push_back(nohgnn::CsrMatrix::from_triplets(n, n, std::move(trip)));
  }
  return nohgnn::SliceSparse3(n, n, std::move(slices));
}

inline double max_abs_diff(const nohgnn::Tensor3& a, const nohgnn::Tensor3& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace testsupport
