#include "cogsl/views.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "cogsl/error.hpp"
#include "cogsl/kernels.hpp"

namespace cogsl {

const char* to_string(ViewKind k) {
  switch (k) {
    case ViewKind::adjacency: return "adjacency";
    case ViewKind::diffusion: return "diffusion";
    case ViewKind::knn: return "knn";
    case ViewKind::subgraph: return "subgraph";
    case ViewKind::estimated: return "estimated";
    case ViewKind::fused: return "fused";
  }
  return "?";
}

bool View::is_symmetric(double tol) const {
  const auto& p = *weights.pattern;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t e = p.row_begin(r); e < p.row_end(r); ++e) {
      if (std::abs(weights.values[e] - weights.at(p.col()[e], r)) > tol) return false;
    }
  }
  return true;
}

std::size_t ScopeSet::total() const {
  std::size_t t = 0;
  for (const auto& l : lists) t += l.size();
  return t;
}

PatternPtr ScopeSet::pattern() const { return SparsePattern::from_rows(lists.size(), lists.size(), lists); }

View adjacency_view(const Graph& graph, bool add_self_loops) {
  CsrMatrix a = adjacency_matrix(graph.n_nodes(), graph.edges());
  if (add_self_loops) {
    a = a.embed_into(with_diagonal(*a.pattern));
    for (std::size_t i = 0; i < graph.n_nodes(); ++i) a.values[*a.pattern->find(i, i)] = 1.0;
  }
  return View{std::move(a), ViewKind::adjacency};
}

namespace {

// D^-1/2 (A+I) D^-1/2 with D the degree of A+I.
CsrMatrix normalized_augmented(const Graph& graph) {
  View v = adjacency_view(graph, true);
  const std::size_t n = graph.n_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(v.weights.row_sum(i));
  const auto& p = *v.weights.pattern;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t e = p.row_begin(r); e < p.row_end(r); ++e)
      v.weights.values[e] *= inv_sqrt[r] * inv_sqrt[p.col()[e]];
  return v.weights;
}

}  // namespace

Tensor ppr_dense(const Graph& graph, double alpha, PprMode mode, double tol) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ArgumentError("ppr alpha must lie in (0,1], got " + std::to_string(alpha));
  }
  const std::size_t n = graph.n_nodes();
  Tensor s(n, n);
  if (alpha == 1.0) {
    for (std::size_t i = 0; i < n; ++i) s(i, i) = 1.0;
    return s;
  }
  CsrMatrix a_hat = normalized_augmented(graph);
  if (mode == PprMode::closed_form) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const auto& p = *a_hat.pattern;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t e = p.row_begin(r); e < p.row_end(r); ++e)
        m(static_cast<Eigen::Index>(r), p.col()[e]) -= (1.0 - alpha) * a_hat.values[e];
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("PPR system is not positive definite");
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        s(r, c) = alpha * inv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  } else {
    for (std::size_t i = 0; i < n; ++i) s(i, i) = alpha;
    Tensor next;
    for (int it = 0; it < 100000; ++it) {
      kernels::spmm(*a_hat.pattern, a_hat.values, s, next);
      double change = 0.0;
      for (std::size_t k = 0; k < next.size(); ++k) {
        next[k] *= (1.0 - alpha);
        if (k % (n + 1) == 0) next[k] += alpha;
        change = std::max(change, std::abs(next[k] - s[k]));
      }
      std::swap(s, next);
      if (change < tol) return s;
    }
    throw NumericalError("PPR power iteration did not converge");
  }
  for (auto& v : s.data())
    if (v < 0.0) v = 0.0;
  return s;
}

View ppr_diffusion(const Graph& graph, double alpha, PprMode mode, double tol) {
  return View{CsrMatrix::from_dense(ppr_dense(graph, alpha, mode, tol)), ViewKind::diffusion};
}

namespace {

// Indices of the h largest values (ties: smaller index), over all columns.
std::vector<Index> top_h_row(std::span<const double> row, std::size_t h) {
  std::vector<Index> idx(row.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  h = std::min(h, row.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h), idx.end(),
                    [&](Index a, Index b) { return row[a] != row[b] ? row[a] > row[b] : a < b; });
  idx.resize(h);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<double> dense_row(const CsrMatrix& m, std::size_t r) {
  std::vector<double> row(m.cols(), 0.0);
  for (std::size_t e = m.pattern->row_begin(r); e < m.pattern->row_end(r); ++e)
    row[m.pattern->col()[e]] = m.values[e];
  return row;
}

}  // namespace

View sparsify_top_h(const View& view, std::size_t h) {
  if (h == 0) throw ArgumentError("top-h sparsification needs h > 0");
  std::vector<CsrMatrix::Triplet> t;
  for (std::size_t r = 0; r < view.n(); ++r) {
    auto row = dense_row(view.weights, r);
    for (Index c : top_h_row(row, h))
      if (row[c] > 0.0) t.push_back({static_cast<Index>(r), c, row[c]});
  }
  return View{CsrMatrix::from_triplets(view.n(), view.n(), std::move(t)), view.kind};
}

std::vector<Edge> knn_edges(const Tensor& features, std::size_t k) {
  if (k == 0) throw ArgumentError("knn k must be positive");
  if (k >= features.rows()) throw ArgumentError("knn k must be smaller than N");
  auto top = kernels::cosine_topk(features, k);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < top.size(); ++i)
    for (Index j : top[i]) edges.emplace_back(std::min<Index>(i, j), std::max<Index>(i, j));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

View knn_view(const Tensor& features, std::size_t k) {
  return View{adjacency_matrix(features.rows(), knn_edges(features, k)), ViewKind::knn};
}

View subgraph_view(const Graph& graph, std::size_t keep_edges, std::uint64_t seed) {
  const auto& edges = graph.edges();
  if (keep_edges > edges.size()) {
    throw ArgumentError("subgraph keeps " + std::to_string(keep_edges) + " edges but graph has " +
                        std::to_string(edges.size()));
  }
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < keep_edges; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<Edge> kept;
  kept.reserve(keep_edges);
  for (std::size_t i = 0; i < keep_edges; ++i) kept.push_back(edges[order[i]]);
  return View{adjacency_matrix(graph.n_nodes(), kept), ViewKind::subgraph};
}

ScopeSet scope_khop(const View& view, std::size_t k) {
  if (k == 0) throw ArgumentError("k-hop scope needs k > 0");
  if (view.kind != ViewKind::adjacency && view.kind != ViewKind::knn &&
      view.kind != ViewKind::subgraph) {
    throw ArgumentError(std::string("k-hop scope is defined for adjacency/knn/subgraph views, not ") +
                        to_string(view.kind));
  }
  const auto& p = *view.weights.pattern;
  const std::size_t n = view.n();
  ScopeSet out;
  out.lists.resize(n);
  std::vector<std::size_t> depth(n, SIZE_MAX);
  std::vector<Index> touched;
  for (std::size_t s = 0; s < n; ++s) {
    std::deque<Index> queue{static_cast<Index>(s)};
    depth[s] = 0;
    touched.assign(1, static_cast<Index>(s));
    while (!queue.empty()) {
      Index u = queue.front();
      queue.pop_front();
      if (depth[u] == k) continue;
      for (Index v : p.row_cols(u)) {
        if (depth[v] != SIZE_MAX) continue;
        depth[v] = depth[u] + 1;
        touched.push_back(v);
        queue.push_back(v);
      }
    }
    for (Index v : touched) depth[v] = SIZE_MAX;
    std::sort(touched.begin(), touched.end());
    out.lists[s] = touched;
  }
  return out;
}

ScopeSet scope_toph(const View& view, std::size_t h) {
  if (h == 0) throw ArgumentError("top-h scope needs h > 0");
  if (view.kind != ViewKind::diffusion) {
    throw ArgumentError(std::string("top-h scope is defined for diffusion views, not ") +
                        to_string(view.kind));
  }
  if (h > view.n()) throw ArgumentError("top-h scope needs h <= N");
  ScopeSet out;
  out.lists.resize(view.n());
  for (std::size_t r = 0; r < view.n(); ++r) {
    auto row = dense_row(view.weights, r);
    auto top = top_h_row(row, h);
    if (!std::binary_search(top.begin(), top.end(), static_cast<Index>(r))) {
      top.insert(std::lower_bound(top.begin(), top.end(), static_cast<Index>(r)), static_cast<Index>(r));
    }
    out.lists[r] = std::move(top);
  }
  return out;
}

void write_view(std::ostream& out, const View& view) {
  const auto& p = *view.weights.pattern;
  out << view.n() << ' ' << p.nnz() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < p.rows(); ++r) {
    for (std::size_t e = p.row_begin(r); e < p.row_end(r); ++e) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, view.weights.values[e]);
      out << r << ' ' << p.col()[e] << ' ';
      out.write(buf, ptr - buf);
      out << '\n';
    }
  }
}

View read_view(std::istream& in, ViewKind kind) {
  std::size_t n = 0, nnz = 0;
  if (!(in >> n >> nnz)) throw LoadError("view header 'N nnz' missing");
  std::vector<CsrMatrix::Triplet> t;
  t.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t i = 0, j = 0;
    double w = 0.0;
    if (!(in >> i >> j >> w)) throw LoadError("view truncated at entry " + std::to_string(k));
    if (i >= n || j >= n) throw ValidationError("view entry out of range at " + std::to_string(k));
    if (w < 0.0) throw ValidationError("negative view weight at entry " + std::to_string(k));
    t.push_back({static_cast<Index>(i), static_cast<Index>(j), w});
  }
  return View{CsrMatrix::from_triplets(n, n, std::move(t)), kind};
}

}  // namespace cogsl
