#pragma once

#include <memory>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/tensor.hpp"

namespace nohgnn {

// Values attached to a shared sparse pattern, enumerated slice-major then
// row-major. Unlike SliceSparse3, stored values may be exactly zero.
struct PatternValues {
  std::shared_ptr<const SliceSparse3> pattern;
  Tensor3 values;  // nnz x 1 x 1

  double at(std::size_t i, std::size_t j, std::size_t t) const;
  // Sum of the values in row i of slice t.
  double row_sum(std::size_t i, std::size_t t) const;
};

using OverlapScores = PatternValues;
using AggregationTensor = PatternValues;

// supp(B_t) plus the diagonal, for every slot.
std::shared_ptr<const SliceSparse3> aggregation_support(const SliceSparse3& overlap);

// p_hat_ijt = <o_it, o_jt> over the support.
Var overlap_scores(Tape& tape, Var features, std::shared_ptr<const SliceSparse3> support);
OverlapScores overlap_scores(const Tensor3& features, std::shared_ptr<const SliceSparse3> support);

// Row-wise softmax of the scores over the support.
Var normalize_scores(Tape& tape, Var scores, std::shared_ptr<const SliceSparse3> support);
AggregationTensor normalize_scores(const OverlapScores& scores);

}  // namespace nohgnn
