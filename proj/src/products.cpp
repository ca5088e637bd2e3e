#include "nohgnn/errors.hpp"
#include "nohgnn/tensor.hpp"

namespace nohgnn {

namespace {

void require_finite(const Tensor3& t, const char* op) {
  if (!t.all_finite()) throw NumericError(std::string(op) + ": non-finite result");
}

void check_mode3(std::size_t d3, const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(op) + ": transform matrix must be square");
  if (static_cast<std::size_t>(m.rows()) != d3) {
    throw ShapeError(std::string(op) + ": tensor has " + std::to_string(d3) + " slices, matrix is " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

Tensor3 mode3_product(const Tensor3& x, const Matrix& m) {
  check_mode3(x.d3(), m, "mode3_product");
  // Slice-major storage is a T x (d1*d2) row-major matrix whose rows are tubes' coordinates.
  const auto T = static_cast<Eigen::Index>(x.d3());
  const auto cols = static_cast<Eigen::Index>(x.slice_size());
  Tensor3 out(x.d1(), x.d2(), x.d3());
  ConstMatrixMap in(x.values().data(), T, cols);
  MatrixMap res(out.values().data(), T, cols);
  res.noalias() = m * in;
  require_finite(out, "mode3_product");
  return out;
}

SliceSparse3 mode3_product(const SliceSparse3& x, const Matrix& m) {
  check_mode3(x.d3(), m, "mode3_product");
  const std::size_t T = x.d3();
  const auto pattern = union_across_slices(x);
  const CsrMatrix& u = pattern.slice(0);
  Matrix gathered = Matrix::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(u.nnz()));
  for (std::size_t t = 0; t < T; ++t) {
    const CsrMatrix& s = x.slice(t);
    for (std::size_t r = 0; r < s.rows; ++r) {
      std::size_t q = u.offsets[r];
      for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p) {
        while (u.indices[q] != s.indices[p]) ++q;
        gathered(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(q)) = s.values[p];
      }
    }
  }
  const Matrix mixed = m * gathered;
  std::vector<CsrMatrix> slices;
  slices.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    CsrMatrix out(u.rows, u.cols);
    for (std::size_t r = 0; r < u.rows; ++r) {
      for (std::size_t q = u.offsets[r]; q < u.offsets[r + 1]; ++q) {
        const double v = mixed(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(q));
        if (v != 0.0) {
          out.indices.push_back(u.indices[q]);
          out.values.push_back(v);
        }
      }
      out.offsets[r + 1] = out.indices.size();
    }
    slices.push_back(std::move(out));
  }
  if (!mixed.allFinite()) throw NumericError("mode3_product: non-finite result");
  return SliceSparse3(x.d1(), x.d2(), std::move(slices));
}

Tensor3 facewise_product(const Tensor3& x, const Tensor3& y) {
  if (x.d2() != y.d1() || x.d3() != y.d3()) {
    throw ShapeError("facewise_product: " + x.shape_string() + " with " + y.shape_string());
  }
  Tensor3 out(x.d1(), y.d2(), x.d3());
  for (std::size_t t = 0; t < x.d3(); ++t) out.slice(t).noalias() = x.slice(t) * y.slice(t);
  require_finite(out, "facewise_product");
  return out;
}

Tensor3 facewise_product(const SliceSparse3& x, const Tensor3& y) {
  if (x.d2() != y.d1() || x.d3() != y.d3()) {
    throw ShapeError("facewise_product: sparse (" + std::to_string(x.d1()) + ", " + std::to_string(x.d2()) +
                     ", " + std::to_string(x.d3()) + ") with " + y.shape_string());
  }
  const std::size_t cols = y.d2();
  Tensor3 out(x.d1(), cols, x.d3());
  for (std::size_t t = 0; t < x.d3(); ++t) {
    const CsrMatrix& s = x.slice(t);
    const double* yt = y.values().data() + t * y.slice_size();
    double* ot = out.values().data() + t * out.slice_size();
    for (std::size_t r = 0; r < s.rows; ++r) {
      double* orow = ot + r * cols;
      for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p) {
        const double v = s.values[p];
        const double* yrow = yt + static_cast<std::size_t>(s.indices[p]) * cols;
        for (std::size_t c = 0; c < cols; ++c) orow[c] += v * yrow[c];
      }
    }
  }
  require_finite(out, "facewise_product");
  return out;
}

Tensor3 m_product(const Tensor3& x, const Tensor3& y, const Transform& tf) {
  if (tf.size() != x.d3()) throw ShapeError("m_product: transform size does not match slice count");
  if (tf.is_identity()) return facewise_product(x, y);
  return mode3_product(facewise_product(mode3_product(x, tf.forward), mode3_product(y, tf.forward)),
                       tf.inverse);
}

Tensor3 m_product(const SliceSparse3& x, const Tensor3& y, const Transform& tf) {
  if (tf.size() != x.d3()) throw ShapeError("m_product: transform size does not match slice count");
  if (tf.is_identity()) return facewise_product(x, y);
  return mode3_product(facewise_product(mode3_product(x, tf.forward), mode3_product(y, tf.forward)),
                       tf.inverse);
}

}  // namespace nohgnn
