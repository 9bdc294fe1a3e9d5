#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cogsl/config.hpp"

namespace cogsl {

/// Applies the configured feature normalisation.
Graph normalize_graph_features(Graph graph, const RunConfig& cfg);
/// For graphs without edges, installs a cosine KNN graph (k = knn_init_k).
Graph ensure_edges(Graph graph, const RunConfig& cfg);
/// normalize_graph_features then ensure_edges.
Graph prepare_graph(Graph graph, const RunConfig& cfg);

/// Edge sets the basic views are built from: graph edges feed A, S and
/// A_sub; KNN edges feed K.
struct ViewSources {
  std::vector<Edge> graph_edges;
  std::vector<Edge> knn_edges;

  const std::vector<Edge>& for_view(BasicView v) const { return v == BasicView::K ? knn_edges : graph_edges; }
  std::vector<Edge>& for_view(BasicView v) { return v == BasicView::K ? knn_edges : graph_edges; }
};

ViewSources view_sources(const Graph& graph, const RunConfig& cfg);

View build_view(std::size_t n, BasicView kind, const std::vector<Edge>& edges, const ViewOptions& opts,
                std::uint64_t seed);
/// k-hop scope for A, K and A_sub; top-h scope for S.
ScopeSet build_scope(const View& view, BasicView kind, const ViewOptions& opts);

struct BasicViews {
  View v1;
  View v2;
  ScopeSet s1;
  ScopeSet s2;
};

BasicViews build_basic_views(std::size_t n, const RunConfig& cfg, const ViewSources& src1,
                             const ViewSources& src2, std::uint64_t seed);

struct RunResult {
  MetricsReport test;
  MetricsReport val;
  std::size_t iterations = 0;
  std::size_t best_iteration = 0;
};

/// Trains on a prepared graph with the given basic views.
RunResult run_cogsl(const Graph& graph, const BasicViews& views, const RunConfig& cfg, std::uint64_t seed,
                    std::ostream* log = nullptr);
/// Plain GCN on `view`.
MetricsReport run_baseline(const Graph& graph, const View& view, const RunConfig& cfg, std::uint64_t seed);

}  // namespace cogsl
