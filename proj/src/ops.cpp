#include "cogsl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "cogsl/error.hpp"
#include "cogsl/kernels.hpp"

namespace cogsl::nd {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

template <class F>
Var unary(Var x, F f, Tape::BackwardFn back) {
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = f(xv[i]);
  return x.tape().record(std::move(y), {x}, std::move(back));
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor y = a.value();
  y.add_inplace(b.value());
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) t.grad_accum(a).add_inplace(g);
    if (b.requires_grad()) t.grad_accum(b).add_inplace(g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) t.grad_accum(a).add_inplace(g);
    if (b.requires_grad()) {
      Tensor& gb = t.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (a.requires_grad()) {
      Tensor& ga = t.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (b.requires_grad()) {
      Tensor& gb = t.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var div(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "div");
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= bv[i];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (a.requires_grad()) {
      Tensor& ga = t.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (b.requires_grad()) {
      Tensor& gb = t.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
    }
  });
}

Var scale(Var a, double s) {
  Tensor y = a.value();
  for (auto& v : y.data()) v *= s;
  return a.tape().record(std::move(y), {a}, [a, s](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_accum(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var add_row_bias(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) throw ArgumentError("add_row_bias: bias must be 1 x C");
  Tensor y = av;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += bv[c];
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) t.grad_accum(a).add_inplace(g);
    if (b.requires_grad()) {
      Tensor& gb = t.grad_accum(b);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.tape().record(Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_accum(a);
    for (auto& v : ga.data()) v += g[0];
  });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                        std::to_string(b.rows()) + " differ");
  }
  Tensor y;
  kernels::gemm(a.value(), b.value(), y);
  return a.tape().record(std::move(y), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (a.requires_grad()) {
      Tensor ga;
      kernels::gemm_nt(g, b.value(), ga);
      t.grad_accum(a).add_inplace(ga);
    }
    if (b.requires_grad()) {
      Tensor gb;
      kernels::gemm_tn(a.value(), g, gb);
      t.grad_accum(b).add_inplace(gb);
    }
  });
}

Var matmul(const CsrMatrix& x, Var w) {
  if (x.cols() != w.rows()) throw ArgumentError("sparse matmul: inner dimensions differ");
  Tensor y;
  kernels::spmm(*x.pattern, x.values, w.value(), y);
  // The feature matrix outlives every tape that references it.
  const CsrMatrix* xp = &x;
  return w.tape().record(std::move(y), {w}, [xp, w](Tape& t, const Tensor& g) {
    Tensor gw;
    kernels::spmm_t(*xp->pattern, xp->values, g, gw);
    t.grad_accum(w).add_inplace(gw);
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  if (begin > end || end > av.rows()) throw ArgumentError("slice_rows: bad range");
  const std::size_t c = av.cols();
  std::vector<double> d(av.data().begin() + static_cast<std::ptrdiff_t>(begin * c),
                        av.data().begin() + static_cast<std::ptrdiff_t>(end * c));
  return a.tape().record(Tensor(end - begin, c, std::move(d)), {a},
                         [a, begin, c](Tape& t, const Tensor& g) {
                           Tensor& ga = t.grad_accum(a);
                           for (std::size_t i = 0; i < g.size(); ++i) ga[begin * c + i] += g[i];
                         });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& av = a.value();
  Tensor y(rows.size(), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= av.rows()) throw ArgumentError("gather_rows: index out of range");
    std::copy(av.row(rows[i]).begin(), av.row(rows[i]).end(), y.row(i).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.tape().record(std::move(y), {a}, [a, idx](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_accum(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < g.cols(); ++c) ga(idx[i], c) += g(i, c);
  });
}

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "none") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "prelu") return Activation::prelu;
  if (name == "elu") return Activation::elu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::prelu: return "prelu";
    case Activation::elu: return "elu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

Var relu(Var x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [x](Tape& t, const Tensor& g) {
    const Tensor& xv = x.value();
    Tensor& gx = t.grad_accum(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  });
}

Var prelu(Var x, Var slope) {
  if (slope.rows() != 1 || slope.cols() != 1) throw ArgumentError("prelu slope must be 1 x 1");
  const double a = slope.value()[0];
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : a * xv[i];
  return x.tape().record(std::move(y), {x, slope}, [x, slope](Tape& t, const Tensor& g) {
    const Tensor& xv = x.value();
    const double a = slope.value()[0];
    if (x.requires_grad()) {
      Tensor& gx = t.grad_accum(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += xv[i] > 0.0 ? g[i] : a * g[i];
    }
    if (slope.requires_grad()) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv[i] <= 0.0) s += g[i] * xv[i];
      t.grad_accum(slope)[0] += s;
    }
  });
}

Var elu(Var x, double alpha) {
  return unary(x, [alpha](double v) { return v > 0.0 ? v : alpha * std::expm1(v); },
               [x, alpha](Tape& t, const Tensor& g) {
                 const Tensor& xv = x.value();
                 Tensor& gx = t.grad_accum(x);
                 for (std::size_t i = 0; i < g.size(); ++i)
                   gx[i] += xv[i] > 0.0 ? g[i] : g[i] * alpha * std::exp(xv[i]);
               });
}

Var tanh(Var x) {
  return unary(x, [](double v) { return std::tanh(v); }, [x](Tape& t, const Tensor& g) {
    const Tensor& xv = x.value();
    Tensor& gx = t.grad_accum(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double th = std::tanh(xv[i]);
      gx[i] += g[i] * (1.0 - th * th);
    }
  });
}

Var sigmoid(Var x) {
  auto sig = [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); };
  return unary(x, sig, [x, sig](Tape& t, const Tensor& g) {
    const Tensor& xv = x.value();
    Tensor& gx = t.grad_accum(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = sig(xv[i]);
      gx[i] += g[i] * s * (1.0 - s);
    }
  });
}

Var activate(Activation kind, Var x, Var slope) {
  switch (kind) {
    case Activation::identity: return x;
    case Activation::relu: return relu(x);
    case Activation::prelu:
      if (!slope.valid()) throw ArgumentError("prelu needs a slope parameter");
      return prelu(x, slope);
    case Activation::elu: return elu(x);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  return x;
}

Var dropout(Var x, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ArgumentError("dropout rate must be < 1");
  const Tensor& xv = x.value();
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<double> mask(xv.size());
  const double s = 1.0 / (1.0 - rate);
  for (auto& m : mask) m = keep(rng) ? s : 0.0;
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] * mask[i];
  return x.tape().record(std::move(y), {x}, [x, mask = std::move(mask)](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_accum(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

Var row_softmax(Var x) {
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto in = xv.row(r);
    auto out = y.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (out[c] = std::exp(in[c] - m));
    for (auto& v : out) v /= z;
  }
  const std::size_t yid = x.tape().size();
  return x.tape().record(std::move(y), {x}, [x, yid](Tape& t, const Tensor& g) {
    const Tensor& yv = t.value(yid);
    Tensor& gx = t.grad_accum(x);
    for (std::size_t r = 0; r < yv.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < yv.cols(); ++c) dot += g(r, c) * yv(r, c);
      for (std::size_t c = 0; c < yv.cols(); ++c) gx(r, c) += yv(r, c) * (g(r, c) - dot);
    }
  });
}

Var cross_entropy(Var probs, std::span<const int> labels, std::span<const std::size_t> nodes) {
  if (nodes.empty()) throw ArgumentError("cross_entropy over an empty index set");
  if (labels.size() != nodes.size()) throw ArgumentError("cross_entropy: labels/nodes length differ");
  constexpr double floor = 1e-12;
  const Tensor& p = probs.value();
  double loss = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= p.rows() || labels[k] < 0 || static_cast<std::size_t>(labels[k]) >= p.cols()) {
      throw ArgumentError("cross_entropy: node or label out of range");
    }
    loss -= std::log(std::max(p(nodes[k], labels[k]), floor));
  }
  std::vector<std::size_t> nv(nodes.begin(), nodes.end());
  std::vector<int> lv(labels.begin(), labels.end());
  return probs.tape().record(Tensor::scalar(loss), {probs},
                             [probs, nv = std::move(nv), lv = std::move(lv)](Tape& t, const Tensor& g) {
                               const Tensor& p = probs.value();
                               Tensor& gp = t.grad_accum(probs);
                               for (std::size_t k = 0; k < nv.size(); ++k) {
                                 const double pv = p(nv[k], lv[k]);
                                 if (pv > floor) gp(nv[k], lv[k]) -= g[0] / pv;
                               }
                             });
}

Var row_l2_normalize(Var x) {
  constexpr double tiny = 1e-15;
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), xv.cols());
  std::vector<double> norms(xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    double s = 0.0;
    for (double v : xv.row(r)) s += v * v;
    norms[r] = std::sqrt(s);
    if (norms[r] > tiny)
      for (std::size_t c = 0; c < xv.cols(); ++c) y(r, c) = xv(r, c) / norms[r];
  }
  const std::size_t yid = x.tape().size();
  return x.tape().record(std::move(y), {x}, [x, yid, norms = std::move(norms)](Tape& t, const Tensor& g) {
    const Tensor& yv = t.value(yid);
    Tensor& gx = t.grad_accum(x);
    for (std::size_t r = 0; r < yv.rows(); ++r) {
      if (norms[r] <= tiny) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < yv.cols(); ++c) dot += yv(r, c) * g(r, c);
      for (std::size_t c = 0; c < yv.cols(); ++c) gx(r, c) += (g(r, c) - yv(r, c) * dot) / norms[r];
    }
  });
}

Var infonce_normalized(Var a, Var b, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("InfoNCE temperature must be positive");
  require_same_shape(a.value(), b.value(), "infonce");
  const std::size_t n = a.rows();
  if (n == 0) throw ArgumentError("InfoNCE batch is empty");
  if (n == 1) {
    spdlog::warn("InfoNCE batch of size 1 has no negatives; loss is 0");
    return a.tape().constant(Tensor::scalar(0.0));
  }
  Tensor s;
  kernels::gemm_nt(a.value(), b.value(), s);
  for (auto& v : s.data()) v /= tau;
  // p(i,j) = row softmax + column softmax of s, kept for the backward pass
  Tensor p(n, n);
  std::vector<double> row_lse(n), col_lse(n);
  const auto [lo, hi] = std::minmax_element(s.data().begin(), s.data().end());
  const double gmax = *hi;
  if (gmax - *lo < 600.0) {
    std::vector<double> rs(n, 0.0), cs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(s(i, j) - gmax);
        p(i, j) = e;
        rs[i] += e;
        cs[j] += e;
      }
    for (std::size_t i = 0; i < n; ++i) {
      row_lse[i] = gmax + std::log(rs[i]);
      col_lse[i] = gmax + std::log(cs[i]);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p(i, j) = p(i, j) / rs[i] + p(i, j) / cs[j];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto row = s.row(i);
      const double m = *std::max_element(row.begin(), row.end());
      double z = 0.0;
      for (double v : row) z += std::exp(v - m);
      row_lse[i] = m + std::log(z);
    }
    std::vector<double> col_max(n, -INFINITY), col_sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) col_max[j] = std::max(col_max[j], s(i, j));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) col_sum[j] += std::exp(s(i, j) - col_max[j]);
    for (std::size_t j = 0; j < n; ++j) col_lse[j] = col_max[j] + std::log(col_sum[j]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        p(i, j) = std::exp(s(i, j) - row_lse[i]) + std::exp(s(i, j) - col_lse[j]);
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) loss += row_lse[i] + col_lse[i] - 2.0 * s(i, i);
  loss /= 2.0 * static_cast<double>(n);
  return a.tape().record(
      Tensor::scalar(loss), {a, b},
      [a, b, tau, p = std::move(p)](Tape& t, const Tensor& g) {
        const std::size_t n = p.rows();
        const double k = g[0] / (2.0 * static_cast<double>(n) * tau);
        Tensor ds(n, n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) ds(i, j) = k * (p(i, j) - (i == j ? 2.0 : 0.0));
        if (a.requires_grad()) {
          Tensor ga;
          kernels::gemm(ds, b.value(), ga);
          t.grad_accum(a).add_inplace(ga);
        }
        if (b.requires_grad()) {
          Tensor gb;
          kernels::gemm_tn(ds, a.value(), gb);
          t.grad_accum(b).add_inplace(gb);
        }
      });
}

Var confidence(Var probs, double eps, double lambda, double delta) {
  const Tensor& p = probs.value();
  if (p.cols() < 2) throw ArgumentError("confidence needs at least two classes");
  const std::size_t n = p.rows();
  Tensor pi(n, 1);
  std::vector<std::size_t> arg_m(n), arg_sm(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t m = 0;
    for (std::size_t c = 1; c < p.cols(); ++c)
      if (p(r, c) > p(r, m)) m = c;
    std::size_t sm = m == 0 ? 1 : 0;
    for (std::size_t c = 0; c < p.cols(); ++c)
      if (c != m && p(r, c) > p(r, sm)) sm = c;
    arg_m[r] = m;
    arg_sm[r] = sm;
    const double margin = std::max(p(r, m) - p(r, sm), delta);
    pi[r] = std::exp(eps * (lambda * std::log(p(r, m)) + (1.0 - lambda) * std::log(margin)));
  }
  const std::size_t pid = probs.tape().size();
  return probs.tape().record(
      std::move(pi), {probs},
      [probs, pid, eps, lambda, delta, arg_m = std::move(arg_m), arg_sm = std::move(arg_sm)](
          Tape& t, const Tensor& g) {
        const Tensor& p = probs.value();
        const Tensor& pi = t.value(pid);
        Tensor& gp = t.grad_accum(probs);
        for (std::size_t r = 0; r < p.rows(); ++r) {
          const double om = p(r, arg_m[r]);
          const double margin = om - p(r, arg_sm[r]);
          const double k = g[r] * pi[r] * eps;
          gp(r, arg_m[r]) += k * lambda / om;
          if (margin > delta) {
            gp(r, arg_m[r]) += k * (1.0 - lambda) / margin;
            gp(r, arg_sm[r]) -= k * (1.0 - lambda) / margin;
          }
        }
      });
}

}  // namespace cogsl::nd
