#include "nohgnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nohgnn/errors.hpp"

namespace nohgnn {

Tensor3::Tensor3(std::size_t d1, std::size_t d2, std::size_t d3, double fill)
    : d1_(d1), d2_(d2), d3_(d3), values_(d1 * d2 * d3, fill) {}

Tensor3::Tensor3(std::size_t d1, std::size_t d2, std::size_t d3, std::vector<double> values)
    : d1_(d1), d2_(d2), d3_(d3), values_(std::move(values)) {
  if (values_.size() != d1 * d2 * d3) {
    throw ShapeError("Tensor3: " + std::to_string(values_.size()) + " values for dims " +
                     std::to_string(d1) + "x" + std::to_string(d2) + "x" + std::to_string(d3));
  }
}

Tensor3 Tensor3::from_matrix(const Matrix& m) {
  Tensor3 out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), 1);
  out.slice(0) = m;
  return out;
}

MatrixMap Tensor3::slice(std::size_t t) {
  return MatrixMap(values_.data() + t * slice_size(), static_cast<Eigen::Index>(d1_),
                   static_cast<Eigen::Index>(d2_));
}

ConstMatrixMap Tensor3::slice(std::size_t t) const {
  return ConstMatrixMap(values_.data() + t * slice_size(), static_cast<Eigen::Index>(d1_),
                        static_cast<Eigen::Index>(d2_));
}

bool Tensor3::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor3::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

std::string Tensor3::shape_string() const {
  std::ostringstream os;
  os << "(" << d1_ << ", " << d2_ << ", " << d3_ << ")";
  return os.str();
}

}  // namespace nohgnn
