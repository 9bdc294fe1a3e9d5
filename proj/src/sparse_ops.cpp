#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cogsl/error.hpp"
#include "cogsl/kernels.hpp"
#include "cogsl/ops.hpp"
#include "cogsl/views.hpp"

namespace cogsl::nd {

namespace {

bool same_pattern(const PatternPtr& a, const PatternPtr& b) { return a == b || *a == *b; }

SparseVar make(const PatternPtr& p, Var values) { return SparseVar{p, values}; }

}  // namespace

SparseVar gcn_normalize(const SparseVar& v, bool self_loops) {
  const SparsePattern& in = *v.pattern;
  if (in.rows() != in.cols()) throw ArgumentError("gcn_normalize: view must be square");
  PatternPtr out_p = self_loops ? with_diagonal(in) : v.pattern;
  std::vector<std::size_t> map = self_loops ? embed_map(in, *out_p) : std::vector<std::size_t>{};
  if (!self_loops) {
    map.resize(in.nnz());
    std::iota(map.begin(), map.end(), std::size_t{0});
  }
  const SparsePattern& q = *out_p;
  const std::size_t n = q.rows();
  const Tensor& vals = v.values.value();
  for (double x : vals.data()) {
    if (x < 0.0) throw ArgumentError("gcn_normalize: view entries must be nonnegative");
  }
  std::vector<double> w(q.nnz(), 0.0);
  for (std::size_t e = 0; e < map.size(); ++e) w[map[e]] = vals[e];
  if (self_loops)
    for (std::size_t i = 0; i < n; ++i) w[*q.find(i, i)] += 1.0;
  std::vector<double> deg(n, 0.0), inv_sqrt(n);
  std::vector<char> clamped(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t e = q.row_begin(r); e < q.row_end(r); ++e) deg[r] += w[e];
    if (deg[r] <= 0.0) {
      deg[r] = 1.0;
      clamped[r] = 1;
    }
    inv_sqrt[r] = 1.0 / std::sqrt(deg[r]);
  }
  Tensor a(q.nnz(), 1);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t e = q.row_begin(r); e < q.row_end(r); ++e)
      a[e] = w[e] * inv_sqrt[r] * inv_sqrt[q.col()[e]];
  Var src = v.values;
  const std::size_t aid = src.tape().size();
  Var out = src.tape().record(
      std::move(a), {src},
      [src, aid, out_p, map = std::move(map), inv_sqrt = std::move(inv_sqrt), deg = std::move(deg),
       clamped = std::move(clamped)](Tape& t, const Tensor& g) {
        const SparsePattern& q = *out_p;
        const Tensor& a = t.value(aid);
        const std::size_t n = q.rows();
        std::vector<double> dd(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t e = q.row_begin(r); e < q.row_end(r); ++e) {
            const double term = g[e] * a[e];
            dd[r] += term;
            dd[q.col()[e]] += term;
          }
        }
        for (std::size_t i = 0; i < n; ++i) dd[i] = clamped[i] ? 0.0 : -0.5 * dd[i] / deg[i];
        Tensor& gv = t.grad_accum(src);
        for (std::size_t e = 0; e < map.size(); ++e) {
          const std::size_t k = map[e];
          const std::size_t r = q.entry_row()[k];
          gv[e] += g[k] * inv_sqrt[r] * inv_sqrt[q.col()[k]] + dd[r];
        }
      });
  return make(out_p, out);
}

Var spmm(const SparseVar& a, Var x) {
  const SparsePattern& p = *a.pattern;
  if (p.cols() != x.rows()) {
    throw ArgumentError("spmm: view is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                        " but operand has " + std::to_string(x.rows()) + " rows");
  }
  Tensor y;
  kernels::spmm(p, a.values.value().data(), x.value(), y);
  PatternPtr pp = a.pattern;
  Var av = a.values;
  return x.tape().record(std::move(y), {av, x}, [pp, av, x](Tape& t, const Tensor& g) {
    if (av.requires_grad()) {
      Tensor ga(pp->nnz(), 1);
      kernels::sddmm(*pp, g, x.value(), ga.data());
      t.grad_accum(av).add_inplace(ga);
    }
    if (x.requires_grad()) {
      Tensor gx;
      kernels::spmm_t(*pp, av.value().data(), g, gx);
      t.grad_accum(x).add_inplace(gx);
    }
  });
}

Var gcn_layer(const SparseVar& view, Var h, Var w, bool self_loops) {
  if (h.cols() != w.rows()) throw ArgumentError("gcn_layer: H and W shapes do not chain");
  if (h.rows() != view.pattern->rows()) throw ArgumentError("gcn_layer: H rows != view size");
  return spmm(gcn_normalize(view, self_loops), matmul(h, w));
}

Var gcn_layer(const SparseVar& view, const CsrMatrix& x, Var w, bool self_loops) {
  if (x.rows() != view.pattern->rows()) throw ArgumentError("gcn_layer: X rows != view size");
  return spmm(gcn_normalize(view, self_loops), matmul(x, w));
}

SparseVar edge_scores(const PatternPtr& pattern, Var u, Var v, Var b) {
  const SparsePattern& p = *pattern;
  if (u.rows() != p.rows() || v.rows() != p.cols() || u.cols() != 1 || v.cols() != 1 ||
      b.rows() != 1 || b.cols() != 1) {
    throw ArgumentError("edge_scores: u, v must be N x 1 and b 1 x 1");
  }
  Tensor s(p.nnz(), 1);
  const Tensor& uv = u.value();
  const Tensor& vv = v.value();
  const double bias = b.value()[0];
  for (std::size_t e = 0; e < p.nnz(); ++e) s[e] = uv[p.entry_row()[e]] + vv[p.col()[e]] + bias;
  Var out = u.tape().record(std::move(s), {u, v, b}, [pattern, u, v, b](Tape& t, const Tensor& g) {
    const SparsePattern& p = *pattern;
    if (u.requires_grad()) {
      Tensor& gu = t.grad_accum(u);
      for (std::size_t e = 0; e < p.nnz(); ++e) gu[p.entry_row()[e]] += g[e];
    }
    if (v.requires_grad()) {
      Tensor& gv = t.grad_accum(v);
      for (std::size_t e = 0; e < p.nnz(); ++e) gv[p.col()[e]] += g[e];
    }
    if (b.requires_grad()) {
      double s = 0.0;
      for (double x : g.data()) s += x;
      t.grad_accum(b)[0] += s;
    }
  });
  return make(pattern, out);
}

SparseVar sparse_row_softmax(const SparseVar& s) {
  const SparsePattern& p = *s.pattern;
  const Tensor& x = s.values.value();
  Tensor y(p.nnz(), 1);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const std::size_t b = p.row_begin(r), e = p.row_end(r);
    if (b == e) throw ArgumentError("masked softmax: row " + std::to_string(r) + " has an empty scope");
    double m = x[b];
    for (std::size_t k = b; k < e; ++k) m = std::max(m, x[k]);
    double z = 0.0;
    for (std::size_t k = b; k < e; ++k) z += (y[k] = std::exp(x[k] - m));
    for (std::size_t k = b; k < e; ++k) y[k] /= z;
  }
  Var src = s.values;
  PatternPtr pp = s.pattern;
  const std::size_t yid = src.tape().size();
  Var out = src.tape().record(std::move(y), {src}, [src, pp, yid](Tape& t, const Tensor& g) {
    const SparsePattern& p = *pp;
    const Tensor& y = t.value(yid);
    Tensor& gx = t.grad_accum(src);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t k = p.row_begin(r); k < p.row_end(r); ++k) dot += g[k] * y[k];
      for (std::size_t k = p.row_begin(r); k < p.row_end(r); ++k) gx[k] += y[k] * (g[k] - dot);
    }
  });
  return make(pp, out);
}

SparseVar sparse_embed(const SparseVar& s, const PatternPtr& superset) {
  if (same_pattern(s.pattern, superset)) return make(superset, s.values);
  auto map = embed_map(*s.pattern, *superset);
  const Tensor& x = s.values.value();
  Tensor y(superset->nnz(), 1);
  for (std::size_t e = 0; e < map.size(); ++e) y[map[e]] = x[e];
  Var src = s.values;
  Var out = src.tape().record(std::move(y), {src}, [src, map = std::move(map)](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_accum(src);
    for (std::size_t e = 0; e < map.size(); ++e) gx[e] += g[map[e]];
  });
  return make(superset, out);
}

SparseVar sparse_add(const SparseVar& a, const SparseVar& b) {
  if (!same_pattern(a.pattern, b.pattern)) throw ArgumentError("sparse_add: patterns differ");
  return make(a.pattern, add(a.values, b.values));
}

SparseVar sparse_scale(const SparseVar& a, double s) { return make(a.pattern, scale(a.values, s)); }

SparseVar sparse_row_scale(const SparseVar& a, Var beta) {
  const SparsePattern& p = *a.pattern;
  if (beta.rows() != p.rows() || beta.cols() != 1) throw ArgumentError("sparse_row_scale: beta must be N x 1");
  const Tensor& x = a.values.value();
  const Tensor& bv = beta.value();
  Tensor y(p.nnz(), 1);
  for (std::size_t e = 0; e < p.nnz(); ++e) y[e] = x[e] * bv[p.entry_row()[e]];
  Var av = a.values;
  PatternPtr pp = a.pattern;
  Var out = av.tape().record(std::move(y), {av, beta}, [av, beta, pp](Tape& t, const Tensor& g) {
    const SparsePattern& p = *pp;
    const Tensor& x = av.value();
    const Tensor& bv = beta.value();
    if (av.requires_grad()) {
      Tensor& ga = t.grad_accum(av);
      for (std::size_t e = 0; e < p.nnz(); ++e) ga[e] += g[e] * bv[p.entry_row()[e]];
    }
    if (beta.requires_grad()) {
      Tensor& gb = t.grad_accum(beta);
      for (std::size_t e = 0; e < p.nnz(); ++e) gb[p.entry_row()[e]] += g[e] * x[e];
    }
  });
  return make(pp, out);
}

SparseVar gather_sparse(Var dense, const PatternPtr& pattern) {
  const SparsePattern& p = *pattern;
  const Tensor& x = dense.value();
  if (x.rows() != p.rows() || x.cols() != p.cols()) throw ArgumentError("gather_sparse: shape mismatch");
  Tensor y(p.nnz(), 1);
  for (std::size_t e = 0; e < p.nnz(); ++e) y[e] = x(p.entry_row()[e], p.col()[e]);
  Var out = dense.tape().record(std::move(y), {dense}, [dense, pattern](Tape& t, const Tensor& g) {
    const SparsePattern& p = *pattern;
    Tensor& gx = t.grad_accum(dense);
    for (std::size_t e = 0; e < p.nnz(); ++e) gx(p.entry_row()[e], p.col()[e]) += g[e];
  });
  return make(pattern, out);
}

Var sparse_to_dense(const SparseVar& s) {
  const SparsePattern& p = *s.pattern;
  const Tensor& x = s.values.value();
  Tensor y(p.rows(), p.cols());
  for (std::size_t e = 0; e < p.nnz(); ++e) y(p.entry_row()[e], p.col()[e]) = x[e];
  Var src = s.values;
  PatternPtr pp = s.pattern;
  return src.tape().record(std::move(y), {src}, [src, pp](Tape& t, const Tensor& g) {
    const SparsePattern& p = *pp;
    Tensor& gx = t.grad_accum(src);
    for (std::size_t e = 0; e < p.nnz(); ++e) gx[e] += g(p.entry_row()[e], p.col()[e]);
  });
}

Var masked_row_softmax(Var x, const ScopeSet& scope) {
  if (scope.size() != x.rows()) throw ArgumentError("masked_row_softmax: scope size != rows");
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (scope[i].empty()) throw ArgumentError("masked_row_softmax: empty scope for row " + std::to_string(i));
  }
  auto pattern = SparsePattern::from_rows(x.rows(), x.cols(), scope.lists);
  return sparse_to_dense(sparse_row_softmax(gather_sparse(x, pattern)));
}

}  // namespace cogsl::nd
