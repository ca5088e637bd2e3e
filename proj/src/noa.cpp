#include "nohgnn/noa.hpp"

#include "nohgnn/errors.hpp"

namespace nohgnn {

namespace {

std::size_t slice_base(const SliceSparse3& pattern, std::size_t t) {
  std::size_t base = 0;
  for (std::size_t s = 0; s < t; ++s) base += pattern.slice(s).nnz();
  return base;
}

}  // namespace

double PatternValues::at(std::size_t i, std::size_t j, std::size_t t) const {
  const CsrMatrix& s = pattern->slice(t);
  const std::size_t pos = s.find(i, j);
  return pos == s.nnz() ? 0.0 : values[slice_base(*pattern, t) + pos];
}

double PatternValues::row_sum(std::size_t i, std::size_t t) const {
  const CsrMatrix& s = pattern->slice(t);
  const std::size_t base = slice_base(*pattern, t);
  double total = 0.0;
  for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) total += values[base + p];
  return total;
}

std::shared_ptr<const SliceSparse3> aggregation_support(const SliceSparse3& overlap) {
  return std::make_shared<const SliceSparse3>(with_diagonal(overlap));
}

Var overlap_scores(Tape& tape, Var features, std::shared_ptr<const SliceSparse3> support) {
  return ad::pair_dot(tape, features, std::move(support));
}

OverlapScores overlap_scores(const Tensor3& features, std::shared_ptr<const SliceSparse3> support) {
  Tape tape;
  const Var scores = overlap_scores(tape, tape.constant(features), support);
  return OverlapScores{std::move(support), tape.value(scores)};
}

Var normalize_scores(Tape& tape, Var scores, std::shared_ptr<const SliceSparse3> support) {
  const SliceSparse3& s = *support;
  for (std::size_t t = 0; t < s.d3(); ++t) {
    for (std::size_t r = 0; r < s.d1(); ++r) {
      if (s.slice(t).row_begin(r) == s.slice(t).row_end(r)) {
        throw ContractError("normalize_scores: row " + std::to_string(r) + " of slot " + std::to_string(t) +
                            " has empty support");
      }
    }
  }
  return ad::row_softmax(tape, scores, std::move(support));
}

AggregationTensor normalize_scores(const OverlapScores& scores) {
  Tape tape;
  const Var p = normalize_scores(tape, tape.constant(scores.values), scores.pattern);
  return AggregationTensor{scores.pattern, tape.value(p)};
}

}  // namespace nohgnn
