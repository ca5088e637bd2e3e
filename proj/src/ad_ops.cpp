#include <algorithm>
#include <atomic>
#include <cmath>

#include "nohgnn/autodiff.hpp"
#include "nohgnn/errors.hpp"

namespace nohgnn::ad {

namespace testing {

namespace {
std::atomic<Fault> g_fault{Fault::none};
}

void set_fault(Fault fault) { g_fault.store(fault); }
Fault fault() { return g_fault.load(); }

}  // namespace testing

namespace {

void accumulate(Tape& tape, std::size_t id, const Tensor3& delta) {
  if (!tape.requires_grad(id)) return;
  Tensor3& g = tape.grad_buffer(id);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += delta[k];
}

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape " + a.shape_string() + " vs " + b.shape_string());
  }
}

void require_values_for(const Tensor3& values, const SliceSparse3& pattern, const char* op) {
  if (values.size() != pattern.nnz()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(values.size()) + " values for pattern with " +
                     std::to_string(pattern.nnz()) + " entries");
  }
}

}  // namespace

Var matmul(Tape& tape, Var a, Var b) {
  const Tensor3& av = tape.value(a);
  const Tensor3& bv = tape.value(b);
  Tensor3 out = facewise_product(av, bv);
  const Var in[] = {a, b};
  return tape.record(std::move(out), in, [a, b](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    const Tensor3& A = tp.value(a);
    const Tensor3& B = tp.value(b);
    if (tp.requires_grad(a.id)) {
      Tensor3& ga = tp.grad_buffer(a.id);
      for (std::size_t t = 0; t < A.d3(); ++t) ga.slice(t).noalias() += g.slice(t) * B.slice(t).transpose();
    }
    if (tp.requires_grad(b.id)) {
      const double factor = testing::fault() == testing::Fault::matmul_rhs ? 2.0 : 1.0;
      Tensor3& gb = tp.grad_buffer(b.id);
      for (std::size_t t = 0; t < B.d3(); ++t) {
        gb.slice(t).noalias() += factor * (A.slice(t).transpose() * g.slice(t));
      }
    }
  });
}

Var sparse_matmul(Tape& tape, std::shared_ptr<const SliceSparse3> a, Var b) {
  Tensor3 out = facewise_product(*a, tape.value(b));
  const Var in[] = {b};
  return tape.record(std::move(out), in, [a, b](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    Tensor3& gb = tp.grad_buffer(b.id);
    const std::size_t cols = g.d2();
    for (std::size_t t = 0; t < a->d3(); ++t) {
      const CsrMatrix& s = a->slice(t);
      const double* gt = g.values().data() + t * g.slice_size();
      double* bt = gb.values().data() + t * gb.slice_size();
      for (std::size_t r = 0; r < s.rows; ++r) {
        const double* grow = gt + r * cols;
        for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p) {
          double* brow = bt + static_cast<std::size_t>(s.indices[p]) * cols;
          const double v = s.values[p];
          for (std::size_t c = 0; c < cols; ++c) brow[c] += v * grow[c];
        }
      }
    }
  });
}

Var sparse_values_matmul(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern, Var b) {
  const Tensor3& vals = tape.value(values);
  const Tensor3& bv = tape.value(b);
  require_values_for(vals, *pattern, "sparse_values_matmul");
  if (pattern->d2() != bv.d1() || pattern->d3() != bv.d3()) {
    throw ShapeError("sparse_values_matmul: pattern does not match right operand " + bv.shape_string());
  }
  const std::size_t cols = bv.d2();
  Tensor3 out(pattern->d1(), cols, pattern->d3());
  std::size_t e = 0;
  for (std::size_t t = 0; t < pattern->d3(); ++t) {
    const CsrMatrix& s = pattern->slice(t);
    const double* bt = bv.values().data() + t * bv.slice_size();
    double* ot = out.values().data() + t * out.slice_size();
    for (std::size_t r = 0; r < s.rows; ++r) {
      double* orow = ot + r * cols;
      for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p, ++e) {
        const double v = vals[e];
        const double* brow = bt + static_cast<std::size_t>(s.indices[p]) * cols;
        for (std::size_t c = 0; c < cols; ++c) orow[c] += v * brow[c];
      }
    }
  }
  const Var in[] = {values, b};
  return tape.record(std::move(out), in, [values, pattern, b](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    const Tensor3& vals = tp.value(values);
    const Tensor3& bv = tp.value(b);
    const bool want_v = tp.requires_grad(values.id);
    const bool want_b = tp.requires_grad(b.id);
    Tensor3* gv = want_v ? &tp.grad_buffer(values.id) : nullptr;
    Tensor3* gb = want_b ? &tp.grad_buffer(b.id) : nullptr;
    const std::size_t cols = bv.d2();
    std::size_t e = 0;
    for (std::size_t t = 0; t < pattern->d3(); ++t) {
      const CsrMatrix& s = pattern->slice(t);
      const double* gt = g.values().data() + t * g.slice_size();
      const double* bt = bv.values().data() + t * bv.slice_size();
      for (std::size_t r = 0; r < s.rows; ++r) {
        const double* grow = gt + r * cols;
        for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p, ++e) {
          const std::size_t col = s.indices[p];
          const double* brow = bt + col * cols;
          if (gv) {
            double dot = 0.0;
            for (std::size_t c = 0; c < cols; ++c) dot += grow[c] * brow[c];
            (*gv)[e] += dot;
          }
          if (gb) {
            double* gbrow = gb->values().data() + t * gb->slice_size() + col * cols;
            const double v = vals[e];
            for (std::size_t c = 0; c < cols; ++c) gbrow[c] += v * grow[c];
          }
        }
      }
    }
  });
}

Var mode3(Tape& tape, Var x, const Matrix& m) {
  Tensor3 out = mode3_product(tape.value(x), m);
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x, mt = Matrix(m.transpose())](Tape& tp, std::size_t self) {
    accumulate(tp, x.id, mode3_product(tp.grad(self), mt));
  });
}

Var sparse_values_mode3(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern,
                        std::shared_ptr<const SliceSparse3> union_pattern, const Matrix& m) {
  const Tensor3& vals = tape.value(values);
  require_values_for(vals, *pattern, "sparse_values_mode3");
  const std::size_t T = pattern->d3();
  if (static_cast<std::size_t>(m.rows()) != T || m.rows() != m.cols()) {
    throw ShapeError("sparse_values_mode3: matrix does not match slice count");
  }
  if (union_pattern->d3() != T) throw ShapeError("sparse_values_mode3: union pattern slice count");
  const CsrMatrix& u = union_pattern->slice(0);
  const std::size_t width = u.nnz();
  // Flat position (t * width + q) of every input entry inside the union layout.
  auto position = std::make_shared<std::vector<std::size_t>>();
  position->reserve(vals.size());
  for (std::size_t t = 0; t < T; ++t) {
    const CsrMatrix& s = pattern->slice(t);
    for (std::size_t r = 0; r < s.rows; ++r) {
      std::size_t q = u.offsets[r];
      for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p) {
        while (q < u.offsets[r + 1] && u.indices[q] != s.indices[p]) ++q;
        if (q == u.offsets[r + 1]) throw ShapeError("sparse_values_mode3: pattern not contained in union");
        position->push_back(t * width + q);
      }
    }
  }
  Matrix gathered = Matrix::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(width));
  for (std::size_t e = 0; e < vals.size(); ++e) gathered.data()[(*position)[e]] = vals[e];
  Tensor3 out(T * width, 1, 1);
  MatrixMap(out.values().data(), static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(width)).noalias() =
      m * gathered;
  const Var in[] = {values};
  return tape.record(std::move(out), in,
                     [values, position, T, width, mt = Matrix(m.transpose())](Tape& tp, std::size_t self) {
                       const Tensor3& g = tp.grad(self);
                       const Matrix back = mt * ConstMatrixMap(g.values().data(), static_cast<Eigen::Index>(T),
                                                               static_cast<Eigen::Index>(width));
                       Tensor3& gv = tp.grad_buffer(values.id);
                       for (std::size_t e = 0; e < gv.size(); ++e) gv[e] += back.data()[(*position)[e]];
                     });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor3& av = tape.value(a);
  const Tensor3& bv = tape.value(b);
  require_same_shape(av, bv, "add");
  Tensor3 out = av;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += bv[k];
  const Var in[] = {a, b};
  return tape.record(std::move(out), in, [a, b](Tape& tp, std::size_t self) {
    accumulate(tp, a.id, tp.grad(self));
    accumulate(tp, b.id, tp.grad(self));
  });
}

Var mul(Tape& tape, Var a, Var b) {
  const Tensor3& av = tape.value(a);
  const Tensor3& bv = tape.value(b);
  require_same_shape(av, bv, "mul");
  Tensor3 out = av;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= bv[k];
  const Var in[] = {a, b};
  return tape.record(std::move(out), in, [a, b](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    if (tp.requires_grad(a.id)) {
      Tensor3& ga = tp.grad_buffer(a.id);
      const Tensor3& bv = tp.value(b);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * bv[k];
    }
    if (tp.requires_grad(b.id)) {
      Tensor3& gb = tp.grad_buffer(b.id);
      const Tensor3& av = tp.value(a);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * av[k];
    }
  });
}

Var scale(Tape& tape, Var a, double c) {
  Tensor3 out = tape.value(a);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= c;
  const Var in[] = {a};
  return tape.record(std::move(out), in, [a, c](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    Tensor3& ga = tp.grad_buffer(a.id);
    for (std::size_t k = 0; k < g.size(); ++k) ga[k] += c * g[k];
  });
}

Var add_bias(Tape& tape, Var x, Var bias) {
  const Tensor3& xv = tape.value(x);
  const Tensor3& bv = tape.value(bias);
  if (xv.d3() != 1 || bv.d1() != 1 || bv.d3() != 1 || bv.d2() != xv.d2()) {
    throw ShapeError("add_bias: " + xv.shape_string() + " with bias " + bv.shape_string());
  }
  Tensor3 out = xv;
  const std::size_t cols = xv.d2();
  for (std::size_t r = 0; r < xv.d1(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  }
  const Var in[] = {x, bias};
  return tape.record(std::move(out), in, [x, bias](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    accumulate(tp, x.id, g);
    if (tp.requires_grad(bias.id)) {
      Tensor3& gb = tp.grad_buffer(bias.id);
      const std::size_t cols = g.d2();
      for (std::size_t r = 0; r < g.d1(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    }
  });
}

Var relu(Tape& tape, Var x) {
  Tensor3 out = tape.value(x);
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    const Tensor3& xv = tp.value(x);
    Tensor3& gx = tp.grad_buffer(x.id);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (xv[k] > 0.0) gx[k] += g[k];
    }
  });
}

Var sigmoid(Tape& tape, Var x) {
  Tensor3 out = tape.value(x);
  for (auto& v : out.values()) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    const Tensor3& y = tp.value(self);
    Tensor3& gx = tp.grad_buffer(x.id);
    for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k] * y[k] * (1.0 - y[k]);
  });
}

Var reshape(Tape& tape, Var x, std::size_t d1, std::size_t d2, std::size_t d3) {
  const Tensor3& xv = tape.value(x);
  if (xv.size() != d1 * d2 * d3) throw ShapeError("reshape: element count changes");
  Tensor3 out(d1, d2, d3, std::vector<double>(xv.values().begin(), xv.values().end()));
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    Tensor3& gx = tp.grad_buffer(x.id);
    for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k];
  });
}

Var replicate_slices(Tape& tape, Var x, std::size_t T) {
  const Tensor3& xv = tape.value(x);
  if (xv.d3() != 1) throw ShapeError("replicate_slices: input must be a matrix");
  Tensor3 out(xv.d1(), xv.d2(), T);
  for (std::size_t t = 0; t < T; ++t) {
    std::copy(xv.values().begin(), xv.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(t * xv.size()));
  }
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x, T](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    Tensor3& gx = tp.grad_buffer(x.id);
    const std::size_t n = gx.size();
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t k = 0; k < n; ++k) gx[k] += g[t * n + k];
    }
  });
}

Var pair_dot(Tape& tape, Var x, std::shared_ptr<const SliceSparse3> pattern) {
  const Tensor3& xv = tape.value(x);
  if (pattern->d1() != xv.d1() || pattern->d2() != xv.d1() || pattern->d3() != xv.d3()) {
    throw ShapeError("pair_dot: pattern does not match features " + xv.shape_string());
  }
  const std::size_t F = xv.d2();
  Tensor3 out(pattern->nnz(), 1, 1);
  std::size_t e = 0;
  for (std::size_t t = 0; t < pattern->d3(); ++t) {
    const CsrMatrix& s = pattern->slice(t);
    const double* xt = xv.values().data() + t * xv.slice_size();
    for (std::size_t r = 0; r < s.rows; ++r) {
      const double* xi = xt + r * F;
      for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p, ++e) {
        const double* xj = xt + static_cast<std::size_t>(s.indices[p]) * F;
        double dot = 0.0;
        for (std::size_t f = 0; f < F; ++f) dot += xi[f] * xj[f];
        out[e] = dot;
      }
    }
  }
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x, pattern](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    const Tensor3& xv = tp.value(x);
    Tensor3& gx = tp.grad_buffer(x.id);
    const std::size_t F = xv.d2();
    std::size_t e = 0;
    for (std::size_t t = 0; t < pattern->d3(); ++t) {
      const CsrMatrix& s = pattern->slice(t);
      const double* xt = xv.values().data() + t * xv.slice_size();
      double* gt = gx.values().data() + t * gx.slice_size();
      for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t p = s.offsets[r]; p < s.offsets[r + 1]; ++p, ++e) {
          const std::size_t c = s.indices[p];
          const double ge = g[e];
          for (std::size_t f = 0; f < F; ++f) {
            gt[r * F + f] += ge * xt[c * F + f];
            gt[c * F + f] += ge * xt[r * F + f];
          }
        }
      }
    }
  });
}

Var row_softmax(Tape& tape, Var values, std::shared_ptr<const SliceSparse3> pattern) {
  const Tensor3& vals = tape.value(values);
  require_values_for(vals, *pattern, "row_softmax");
  Tensor3 out(vals.size(), 1, 1);
  std::size_t base = 0;
  for (std::size_t t = 0; t < pattern->d3(); ++t) {
    const CsrMatrix& s = pattern->slice(t);
    for (std::size_t r = 0; r < s.rows; ++r) {
      const std::size_t b = base + s.offsets[r];
      const std::size_t n = s.offsets[r + 1] - s.offsets[r];
      if (n == 0) continue;
      const auto w = masked_softmax(vals.values().subspan(b, n));
      std::copy(w.begin(), w.end(), out.values().begin() + static_cast<std::ptrdiff_t>(b));
    }
    base += s.nnz();
  }
  const Var in[] = {values};
  return tape.record(std::move(out), in, [values, pattern](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    const Tensor3& w = tp.value(self);
    Tensor3& gv = tp.grad_buffer(values.id);
    std::size_t base = 0;
    for (std::size_t t = 0; t < pattern->d3(); ++t) {
      const CsrMatrix& s = pattern->slice(t);
      for (std::size_t r = 0; r < s.rows; ++r) {
        const std::size_t b = base + s.offsets[r];
        const std::size_t e = base + s.offsets[r + 1];
        double inner = 0.0;
        for (std::size_t k = b; k < e; ++k) inner += w[k] * g[k];
        for (std::size_t k = b; k < e; ++k) gv[k] += w[k] * (g[k] - inner);
      }
      base += s.nnz();
    }
  });
}

Var gather_concat(Tape& tape, Var x, std::shared_ptr<const std::vector<PairIndex>> pairs) {
  const Tensor3& xv = tape.value(x);
  const std::size_t F = xv.d2();
  for (const auto& pr : *pairs) {
    if (pr.i >= xv.d1() || pr.j >= xv.d1() || pr.t >= xv.d3()) {
      throw ShapeError("gather_concat: pair (" + std::to_string(pr.i) + ", " + std::to_string(pr.j) + ", " +
                       std::to_string(pr.t) + ") out of range for " + xv.shape_string());
    }
  }
  Tensor3 out(pairs->size(), 2 * F, 1);
  for (std::size_t k = 0; k < pairs->size(); ++k) {
    const auto& pr = (*pairs)[k];
    const double* hi = xv.values().data() + (pr.t * xv.d1() + pr.i) * F;
    const double* hj = xv.values().data() + (pr.t * xv.d1() + pr.j) * F;
    double* row = out.values().data() + k * 2 * F;
    std::copy(hi, hi + F, row);
    std::copy(hj, hj + F, row + F);
  }
  const Var in[] = {x};
  return tape.record(std::move(out), in, [x, pairs](Tape& tp, std::size_t self) {
    const Tensor3& g = tp.grad(self);
    Tensor3& gx = tp.grad_buffer(x.id);
    const std::size_t F = gx.d2();
    for (std::size_t k = 0; k < pairs->size(); ++k) {
      const auto& pr = (*pairs)[k];
      const double* row = g.values().data() + k * 2 * F;
      double* gi = &gx(pr.i, 0, pr.t);
      double* gj = &gx(pr.j, 0, pr.t);
      for (std::size_t f = 0; f < F; ++f) gi[f] += row[f];
      for (std::size_t f = 0; f < F; ++f) gj[f] += row[F + f];
    }
  });
}

Var sum(Tape& tape, Var x) {
  double total = 0.0;
  for (const double v : tape.value(x).values()) total += v;
  const Var in[] = {x};
  return tape.record(Tensor3(1, 1, 1, total), in, [x](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    Tensor3& gx = tp.grad_buffer(x.id);
    for (auto& v : gx.values()) v += g;
  });
}

Var sum_squares(Tape& tape, Var x) {
  double total = 0.0;
  for (const double v : tape.value(x).values()) total += v * v;
  const Var in[] = {x};
  return tape.record(Tensor3(1, 1, 1, total), in, [x](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const Tensor3& xv = tp.value(x);
    Tensor3& gx = tp.grad_buffer(x.id);
    for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += 2.0 * g * xv[k];
  });
}

Var bce(Tape& tape, Var probs, std::shared_ptr<const std::vector<double>> labels) {
  const Tensor3& p = tape.value(probs);
  if (labels->empty()) throw ParameterError("bce: empty label set");
  if (p.size() != labels->size()) throw ShapeError("bce: probabilities and labels differ in length");
  const double n = static_cast<double>(labels->size());
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double q = std::clamp(p[k], kProbClamp, 1.0 - kProbClamp);
    const double y = (*labels)[k];
    total += y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  const Var in[] = {probs};
  return tape.record(Tensor3(1, 1, 1, -total / n), in, [probs, labels, n](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    const Tensor3& p = tp.value(probs);
    Tensor3& gp = tp.grad_buffer(probs.id);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double q = p[k];
      if (q < kProbClamp || q > 1.0 - kProbClamp) continue;
      const double y = (*labels)[k];
      gp[k] += -g * (y / q - (1.0 - y) / (1.0 - q)) / n;
    }
  });
}

}  // namespace nohgnn::ad
