#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nohgnn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

// Dense third-order array. Frontal slice t is a row-major d1 x d2 matrix and
// slices are stored back to back, so element (i, j, t) lives at
// t * d1 * d2 + i * d2 + j.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d1, std::size_t d2, std::size_t d3, double fill = 0.0);
  Tensor3(std::size_t d1, std::size_t d2, std::size_t d3, std::vector<double> values);

  static Tensor3 from_matrix(const Matrix& m);

  std::size_t d1() const { return d1_; }
  std::size_t d2() const { return d2_; }
  std::size_t d3() const { return d3_; }
  std::size_t size() const { return values_.size(); }
  std::size_t slice_size() const { return d1_ * d2_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t t) {
    return values_[(t * d1_ + i) * d2_ + j];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t t) const {
    return values_[(t * d1_ + i) * d2_ + j];
  }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& storage() { return values_; }

  MatrixMap slice(std::size_t t);
  ConstMatrixMap slice(std::size_t t) const;

  bool same_shape(const Tensor3& other) const {
    return d1_ == other.d1_ && d2_ == other.d2_ && d3_ == other.d3_;
  }
  bool all_finite() const;
  void fill(double v);
  std::string shape_string() const;

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  std::size_t d3_ = 0;
  std::vector<double> values_;
};

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Compressed-row matrix. Column indices are strictly increasing within a row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  CsrMatrix() = default;
  CsrMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), offsets(r + 1, 0) {}

  // Duplicates are summed; entries that end up exactly zero are dropped.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static CsrMatrix identity(std::size_t n);

  std::size_t nnz() const { return indices.size(); }
  std::size_t row_begin(std::size_t r) const { return offsets[r]; }
  std::size_t row_end(std::size_t r) const { return offsets[r + 1]; }
  // Stored value at (r, c) or 0 when absent.
  double at(std::size_t r, std::size_t c) const;
  // Position of (r, c) in indices/values, or nnz() when absent.
  std::size_t find(std::size_t r, std::size_t c) const;

  Matrix to_dense() const;
  void validate() const;

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

CsrMatrix sparse_multiply(const CsrMatrix& a, const CsrMatrix& b);
CsrMatrix sparse_add(const CsrMatrix& a, const CsrMatrix& b);
// Structural union of two patterns; values of the result are 1.
CsrMatrix pattern_union(const CsrMatrix& a, const CsrMatrix& b);

// Stack of d3 compressed-row slices, each d1 x d2.
class SliceSparse3 {
 public:
  SliceSparse3() = default;
  SliceSparse3(std::size_t d1, std::size_t d2, std::size_t d3);
  SliceSparse3(std::size_t d1, std::size_t d2, std::vector<CsrMatrix> slices);

  static SliceSparse3 from_dense(const Tensor3& dense);

  std::size_t d1() const { return d1_; }
  std::size_t d2() const { return d2_; }
  std::size_t d3() const { return slices_.size(); }
  std::size_t nnz() const;

  const CsrMatrix& slice(std::size_t t) const { return slices_[t]; }
  CsrMatrix& slice(std::size_t t) { return slices_[t]; }
  const std::vector<CsrMatrix>& slices() const { return slices_; }

  // Offset of slice t's first entry in a flat, slice-major enumeration.
  std::vector<std::size_t> entry_offsets() const;

  Tensor3 to_dense() const;
  void validate() const;

  friend bool operator==(const SliceSparse3&, const SliceSparse3&) = default;

 private:
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  std::vector<CsrMatrix> slices_;
};

// Pattern of `s` with the diagonal added to every slice. Values are 1.
SliceSparse3 with_diagonal(const SliceSparse3& s);
// Every slice gets the union of all slice patterns. Values are 1.
SliceSparse3 union_across_slices(const SliceSparse3& s);

enum class TransformKind { identity, dct2, custom };

std::string to_string(TransformKind kind);
TransformKind parse_transform_kind(const std::string& name);

// Invertible mode-3 transform. `forward` multiplies each tube, `inverse`
// undoes it.
struct Transform {
  TransformKind kind = TransformKind::identity;
  Matrix forward;
  Matrix inverse;

  std::size_t size() const { return static_cast<std::size_t>(forward.rows()); }
  bool is_identity() const { return kind == TransformKind::identity; }
};

Transform make_transform(TransformKind kind, std::size_t T);
Transform make_custom_transform(const Matrix& m);
Matrix dct2_matrix(std::size_t T);

// result(i, j, :) = M * X(i, j, :)
Tensor3 mode3_product(const Tensor3& x, const Matrix& m);
// Sparse variant. The result pattern is the union of the slice patterns,
// with exact zeros pruned.
SliceSparse3 mode3_product(const SliceSparse3& x, const Matrix& m);

// Slice-wise matrix product: result_t = X_t * Y_t.
Tensor3 facewise_product(const Tensor3& x, const Tensor3& y);
Tensor3 facewise_product(const SliceSparse3& x, const Tensor3& y);

// ((X x3 M) facewise (Y x3 M)) x3 M^-1
Tensor3 m_product(const Tensor3& x, const Tensor3& y, const Transform& tf);
Tensor3 m_product(const SliceSparse3& x, const Tensor3& y, const Transform& tf);

// B_t = sum_{k=1..K} A_t^k, slice by slice.
SliceSparse3 sparse_matpower_sum(const SliceSparse3& a, std::size_t k);

}  // namespace nohgnn
