#include <cmath>
#include <numbers>

#include "nohgnn/errors.hpp"
#include "nohgnn/tensor.hpp"

namespace nohgnn {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kInverseTolerance = 1e-10;

void check_inverse(const Matrix& m, const Matrix& inv) {
  const Matrix residual = m * inv - Matrix::Identity(m.rows(), m.cols());
  if (residual.cwiseAbs().maxCoeff() > kInverseTolerance) {
    throw IllConditionedError("transform inverse residual exceeds 1e-10");
  }
}

}  // namespace

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::identity:
      return "identity";
    case TransformKind::dct2:
      return "dct";
    case TransformKind::custom:
      return "custom";
  }
  return "unknown";
}

TransformKind parse_transform_kind(const std::string& name) {
  if (name == "identity") return TransformKind::identity;
  if (name == "dct" || name == "dct2" || name == "dct2-orthonormal") return TransformKind::dct2;
  if (name == "custom") return TransformKind::custom;
  throw ParameterError("unknown transform '" + name + "' (expected identity or dct)");
}

Matrix dct2_matrix(std::size_t T) {
  Matrix m(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
  const double n = static_cast<double>(T);
  for (std::size_t k = 0; k < T; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t j = 0; j < T; ++j) {
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) *
                           static_cast<double>(k) / (2.0 * n));
    }
  }
  return m;
}

Transform make_transform(TransformKind kind, std::size_t T) {
  if (T == 0) throw ParameterError("make_transform: T must be at least 1");
  Transform tf;
  tf.kind = kind;
  switch (kind) {
    case TransformKind::identity:
      tf.forward = Matrix::Identity(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T));
      tf.inverse = tf.forward;
      break;
    case TransformKind::dct2:
      tf.forward = dct2_matrix(T);
      tf.inverse = tf.forward.transpose();
      check_inverse(tf.forward, tf.inverse);
      break;
    case TransformKind::custom:
      throw ParameterError("make_transform: custom transforms need a matrix (make_custom_transform)");
  }
  return tf;
}

Transform make_custom_transform(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ShapeError("custom transform must be a non-empty square matrix");
  }
  if (!m.allFinite()) throw NumericError("custom transform has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0 || smax / smin > kMaxCondition) {
    throw IllConditionedError("custom transform is singular or ill-conditioned (condition > 1e12)");
  }
  Transform tf;
  tf.kind = TransformKind::custom;
  tf.forward = m;
  tf.inverse = m.fullPivLu().inverse();
  check_inverse(tf.forward, tf.inverse);
  return tf;
}

}  // namespace nohgnn
