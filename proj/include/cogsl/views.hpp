#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cogsl/graph.hpp"
#include "cogsl/sparse.hpp"

namespace cogsl {

enum class ViewKind { adjacency, diffusion, knn, subgraph, estimated, fused };
const char* to_string(ViewKind k);

/// Nonnegative N x N structure matrix plus where it came from.
struct View {
  CsrMatrix weights;
  ViewKind kind = ViewKind::adjacency;

  std::size_t n() const { return weights.rows(); }
  bool is_symmetric(double tol = 0.0) const;
};

/// Per-node candidate neighbour lists bounding re-estimation.
struct ScopeSet {
  std::vector<std::vector<Index>> lists;

  std::size_t size() const { return lists.size(); }
  const std::vector<Index>& operator[](std::size_t i) const { return lists[i]; }
  std::size_t total() const;
  PatternPtr pattern() const;
};

View adjacency_view(const Graph& graph, bool add_self_loops);

enum class PprMode { closed_form, power_iteration };

/// S = alpha (I - (1-alpha) D^-1/2 (A+I) D^-1/2)^-1. Self-loops are added
/// before normalisation so every degree is positive. Exact zeros (between
/// disconnected components) are not stored.
View ppr_diffusion(const Graph& graph, double alpha, PprMode mode, double tol = 1e-12);
/// Dense PPR matrix; exposed for tests and for top-h sparsification.
Tensor ppr_dense(const Graph& graph, double alpha, PprMode mode, double tol = 1e-12);

/// Keeps the h largest entries of each row (ties: smaller index).
View sparsify_top_h(const View& view, std::size_t h);

/// Cosine-similarity KNN edges: (i,j) if j is in i's top-k or vice versa.
std::vector<Edge> knn_edges(const Tensor& features, std::size_t k);
View knn_view(const Tensor& features, std::size_t k);

View subgraph_view(const Graph& graph, std::size_t keep_edges, std::uint64_t seed);

ScopeSet scope_khop(const View& view, std::size_t k);
ScopeSet scope_toph(const View& view, std::size_t h);

/// Row-sparse text format: header "N nnz", then one "i j w" line per entry.
void write_view(std::ostream& out, const View& view);
View read_view(std::istream& in, ViewKind kind);

}  // namespace cogsl
