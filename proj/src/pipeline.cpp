#include "cogsl/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "cogsl/error.hpp"

namespace cogsl {

namespace {

Tensor normalize_features(const Tensor& x, FeatureNorm mode) {
  Tensor out = x;
  const std::size_t n = x.rows(), d = x.cols();
  if (mode == FeatureNorm::row) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : out.row(i)) s += v;
      if (s != 0.0)
        for (double& v : out.row(i)) v /= s;
    }
  } else if (mode == FeatureNorm::standardize) {
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += x(i, c);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += (x(i, c) - mean) * (x(i, c) - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) out(i, c) = sd > 0.0 ? (x(i, c) - mean) / sd : 0.0;
    }
  }
  return out;
}

}  // namespace

Graph normalize_graph_features(Graph graph, const RunConfig& cfg) {
  if (cfg.feature_norm == FeatureNorm::none) return graph;
  return graph.with_features(normalize_features(graph.features(), cfg.feature_norm));
}

Graph ensure_edges(Graph graph, const RunConfig& cfg) {
  if (graph.n_edges() != 0) return graph;
  return graph.with_edges(knn_edges(graph.features(), cfg.view.knn_init_k));
}

Graph prepare_graph(Graph graph, const RunConfig& cfg) {
  return ensure_edges(normalize_graph_features(std::move(graph), cfg), cfg);
}

ViewSources view_sources(const Graph& graph, const RunConfig& cfg) {
  ViewSources s;
  s.graph_edges = graph.edges();
  if (cfg.views[0] == BasicView::K || cfg.views[1] == BasicView::K)
    s.knn_edges = knn_edges(graph.features(), cfg.view.knn_k);
  return s;
}

View build_view(std::size_t n, BasicView kind, const std::vector<Edge>& edges, const ViewOptions& opts,
                std::uint64_t seed) {
  // The views only read n and the edge list; features and splits are dummies.
  std::vector<int> labels(n, 0);
  Graph g(Tensor(n, 1), labels, edges, {std::vector<std::size_t>{0}, {}, {}});
  switch (kind) {
    case BasicView::A: return adjacency_view(g, false);
    case BasicView::K: return View{adjacency_view(g, false).weights, ViewKind::knn};
    case BasicView::S: {
      View s = ppr_diffusion(g, opts.ppr_alpha, PprMode::closed_form);
      return sparsify_top_h(s, std::min(opts.ppr_keep > 0 ? opts.ppr_keep : opts.scope_h, n));
    }
    case BasicView::A_sub: {
      auto keep = static_cast<std::size_t>(std::floor(opts.subgraph_keep * static_cast<double>(edges.size())));
      return subgraph_view(g, keep, seed);
    }
  }
  throw ArgumentError("unknown view kind");
}

ScopeSet build_scope(const View& view, BasicView kind, const ViewOptions& opts) {
  if (kind == BasicView::S) return scope_toph(view, std::min(opts.scope_h, view.n()));
  return scope_khop(view, opts.scope_k);
}

BasicViews build_basic_views(std::size_t n, const RunConfig& cfg, const ViewSources& src1,
                             const ViewSources& src2, std::uint64_t seed) {
  BasicViews b;
  b.v1 = build_view(n, cfg.views[0], src1.for_view(cfg.views[0]), cfg.view, seed);
  b.v2 = build_view(n, cfg.views[1], src2.for_view(cfg.views[1]), cfg.view, seed + 1);
  b.s1 = build_scope(b.v1, cfg.views[0], cfg.view);
  b.s2 = build_scope(b.v2, cfg.views[1], cfg.view);
  return b;
}

RunResult run_cogsl(const Graph& graph, const BasicViews& views, const RunConfig& cfg, std::uint64_t seed,
                    std::ostream* log) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  Trainer trainer(graph, views.v1, views.s1, views.v2, views.s2, tc);
  const TrainState& st = trainer.train(log);
  RunResult r;
  r.test = trainer.evaluate(Split::test);
  r.val = trainer.evaluate(Split::val);
  r.iterations = st.iteration;
  r.best_iteration = st.best_iteration;
  return r;
}

MetricsReport run_baseline(const Graph& graph, const View& view, const RunConfig& cfg, std::uint64_t seed) {
  BaselineConfig bc = cfg.baseline;
  bc.seed = seed;
  return train_gcn_baseline(graph, view, bc);
}

}  // namespace cogsl
