#include <algorithm>
#include <cmath>
#include <numeric>

#include "nohgnn/errors.hpp"
#include "nohgnn/tensor.hpp"

namespace nohgnn {

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  for (const auto& tr : triplets) {
    if (tr.row >= rows || tr.col >= cols) {
      throw ShapeError("triplet (" + std::to_string(tr.row) + ", " + std::to_string(tr.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix out(rows, cols);
  out.indices.reserve(triplets.size());
  out.values.reserve(triplets.size());
  std::size_t k = 0;
  while (k < triplets.size()) {
    const auto r = triplets[k].row;
    const auto c = triplets[k].col;
    double sum = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) {
      sum += triplets[k].value;
    }
    if (sum != 0.0) {
      out.indices.push_back(c);
      out.values.push_back(sum);
      ++out.offsets[r + 1];
    }
  }
  std::partial_sum(out.offsets.begin(), out.offsets.end(), out.offsets.begin());
  return out;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix out(n, n);
  out.indices.resize(n);
  out.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.indices[i] = static_cast<std::uint32_t>(i);
    out.offsets[i + 1] = i + 1;
  }
  return out;
}

std::size_t CsrMatrix::find(std::size_t r, std::size_t c) const {
  const auto first = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r]);
  const auto last = indices.begin() + static_cast<std::ptrdiff_t>(offsets[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it != last && *it == c) return static_cast<std::size_t>(it - indices.begin());
  return nnz();
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto pos = find(r, c);
  return pos == nnz() ? 0.0 : values[pos];
}

Matrix CsrMatrix::to_dense() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      out(static_cast<Eigen::Index>(r), indices[p]) = values[p];
    }
  }
  return out;
}

void CsrMatrix::validate() const {
  if (offsets.size() != rows + 1 || offsets.front() != 0 || offsets.back() != indices.size() ||
      indices.size() != values.size()) {
    throw ShapeError("CsrMatrix: inconsistent offsets/indices/values");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (offsets[r] > offsets[r + 1]) throw ShapeError("CsrMatrix: offsets not monotone");
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      if (indices[p] >= cols) throw ShapeError("CsrMatrix: column index out of range");
      if (p > offsets[r] && indices[p] <= indices[p - 1]) {
        throw ShapeError("CsrMatrix: column indices not strictly increasing");
      }
    }
  }
}

// Row-wise accumulation: each output row is the sorted merge of scaled rows of b.
CsrMatrix sparse_multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols != b.rows) {
    throw ShapeError("sparse_multiply: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
  CsrMatrix out(a.rows, b.cols);
  std::vector<double> accum(b.cols, 0.0);
  std::vector<char> touched(b.cols, 0);
  std::vector<std::uint32_t> cols;
  for (std::size_t r = 0; r < a.rows; ++r) {
    cols.clear();
    for (std::size_t p = a.offsets[r]; p < a.offsets[r + 1]; ++p) {
      const double av = a.values[p];
      const std::size_t k = a.indices[p];
      for (std::size_t q = b.offsets[k]; q < b.offsets[k + 1]; ++q) {
        const auto c = b.indices[q];
        if (!touched[c]) {
          touched[c] = 1;
          cols.push_back(c);
        }
        accum[c] += av * b.values[q];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (const auto c : cols) {
      if (accum[c] != 0.0) {
        out.indices.push_back(c);
        out.values.push_back(accum[c]);
      }
      accum[c] = 0.0;
      touched[c] = 0;
    }
    out.offsets[r + 1] = out.indices.size();
  }
  return out;
}

namespace {

template <typename Combine>
CsrMatrix merge_rows(const CsrMatrix& a, const CsrMatrix& b, Combine combine, bool keep_zeros) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError("sparse merge: shape mismatch");
  }
  CsrMatrix out(a.rows, a.cols);
  out.indices.reserve(a.nnz() + b.nnz());
  out.values.reserve(a.nnz() + b.nnz());
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::size_t p = a.offsets[r];
    std::size_t q = b.offsets[r];
    const std::size_t pe = a.offsets[r + 1];
    const std::size_t qe = b.offsets[r + 1];
    while (p < pe || q < qe) {
      std::uint32_t c;
      double v;
      if (q == qe || (p < pe && a.indices[p] < b.indices[q])) {
        c = a.indices[p];
        v = combine(a.values[p], 0.0);
        ++p;
      } else if (p == pe || b.indices[q] < a.indices[p]) {
        c = b.indices[q];
        v = combine(0.0, b.values[q]);
        ++q;
      } else {
        c = a.indices[p];
        v = combine(a.values[p], b.values[q]);
        ++p;
        ++q;
      }
      if (keep_zeros || v != 0.0) {
        out.indices.push_back(c);
        out.values.push_back(v);
      }
    }
    out.offsets[r + 1] = out.indices.size();
  }
  return out;
}

}  // namespace

CsrMatrix sparse_add(const CsrMatrix& a, const CsrMatrix& b) {
  return merge_rows(a, b, [](double x, double y) { return x + y; }, false);
}

CsrMatrix pattern_union(const CsrMatrix& a, const CsrMatrix& b) {
  return merge_rows(a, b, [](double, double) { return 1.0; }, true);
}

SliceSparse3::SliceSparse3(std::size_t d1, std::size_t d2, std::size_t d3)
    : d1_(d1), d2_(d2), slices_(d3, CsrMatrix(d1, d2)) {}

SliceSparse3::SliceSparse3(std::size_t d1, std::size_t d2, std::vector<CsrMatrix> slices)
    : d1_(d1), d2_(d2), slices_(std::move(slices)) {
  for (const auto& s : slices_) {
    if (s.rows != d1 || s.cols != d2) throw ShapeError("SliceSparse3: slice shape mismatch");
  }
}

SliceSparse3 SliceSparse3::from_dense(const Tensor3& dense) {
  std::vector<CsrMatrix> slices;
  slices.reserve(dense.d3());
  for (std::size_t t = 0; t < dense.d3(); ++t) {
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < dense.d1(); ++i) {
      for (std::size_t j = 0; j < dense.d2(); ++j) {
        if (dense(i, j, t) != 0.0) {
          trip.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), dense(i, j, t)});
        }
      }
    }
    slices.push_back(CsrMatrix::from_triplets(dense.d1(), dense.d2(), std::move(trip)));
  }
  return SliceSparse3(dense.d1(), dense.d2(), std::move(slices));
}

std::size_t SliceSparse3::nnz() const {
  std::size_t n = 0;
  for (const auto& s : slices_) n += s.nnz();
  return n;
}

std::vector<std::size_t> SliceSparse3::entry_offsets() const {
  std::vector<std::size_t> out(slices_.size() + 1, 0);
  for (std::size_t t = 0; t < slices_.size(); ++t) out[t + 1] = out[t] + slices_[t].nnz();
  return out;
}

Tensor3 SliceSparse3::to_dense() const {
  Tensor3 out(d1_, d2_, d3());
  for (std::size_t t = 0; t < d3(); ++t) out.slice(t) = slices_[t].to_dense();
  return out;
}

void SliceSparse3::validate() const {
  for (const auto& s : slices_) {
    if (s.rows != d1_ || s.cols != d2_) throw ShapeError("SliceSparse3: slice shape mismatch");
    s.validate();
    for (const double v : s.values) {
      if (v == 0.0) throw ShapeError("SliceSparse3: explicit zero stored");
    }
  }
}

SliceSparse3 with_diagonal(const SliceSparse3& s) {
  if (s.d1() != s.d2()) throw ShapeError("with_diagonal: slices must be square");
  const auto eye = CsrMatrix::identity(s.d1());
  std::vector<CsrMatrix> slices;
  slices.reserve(s.d3());
  for (const auto& sl : s.slices()) slices.push_back(pattern_union(sl, eye));
  return SliceSparse3(s.d1(), s.d2(), std::move(slices));
}

SliceSparse3 union_across_slices(const SliceSparse3& s) {
  CsrMatrix all(s.d1(), s.d2());
  for (const auto& sl : s.slices()) all = pattern_union(all, sl);
  return SliceSparse3(s.d1(), s.d2(), std::vector<CsrMatrix>(s.d3(), all));
}

SliceSparse3 sparse_matpower_sum(const SliceSparse3& a, std::size_t k) {
  if (k == 0) throw ParameterError("sparse_matpower_sum: hop count K must be at least 1");
  if (a.d1() != a.d2()) throw ShapeError("sparse_matpower_sum: slices must be square");
  std::vector<CsrMatrix> out;
  out.reserve(a.d3());
  for (const auto& at : a.slices()) {
    CsrMatrix power = at;
    CsrMatrix sum = at;
    for (std::size_t hop = 2; hop <= k; ++hop) {
      power = sparse_multiply(power, at);
      sum = sparse_add(sum, power);
    }
    out.push_back(std::move(sum));
  }
  return SliceSparse3(a.d1(), a.d2(), std::move(out));
}

}  // namespace nohgnn
