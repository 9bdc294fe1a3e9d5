#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cogsl/sparse.hpp"
#include "cogsl/tensor.hpp"

namespace cogsl {

enum class Split { train, val, test };
const char* to_string(Split s);

/// Undirected edge stored canonically with first < second.
using Edge = std::pair<Index, Index>;

/// Node indices of one split together with their labels.
struct LabeledSet {
  std::vector<std::size_t> nodes;
  std::vector<int> labels;
};

/// Attributed, labelled, undirected graph with fixed train/val/test splits.
/// Immutable once constructed; attacks produce new Graph values.
class Graph {
 public:
  Graph() = default;
  /// Builds and validates. Edges are canonicalised (i<j), deduplicated and
  /// stripped of self-loops.
  Graph(Tensor features, std::vector<int> labels, std::vector<Edge> edges,
        std::array<std::vector<std::size_t>, 3> splits);

  std::size_t n_nodes() const { return features_.rows(); }
  std::size_t n_features() const { return features_.cols(); }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t n_edges() const { return edges_.size(); }

  const Tensor& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& split(Split s) const { return splits_[static_cast<int>(s)]; }

  /// Labels restricted to one split. Training code only ever sees
  /// labeled(Split::train).
  LabeledSet labeled(Split s) const;

  /// Full label vector; used for serialisation and validation only.
  const std::vector<int>& all_labels() const { return labels_; }

  Graph with_edges(std::vector<Edge> edges) const;
  Graph with_features(Tensor features) const;

  /// Number of self-loops / duplicates removed while canonicalising.
  std::size_t dropped_self_loops() const { return dropped_self_loops_; }
  std::size_t dropped_duplicates() const { return dropped_duplicates_; }

 private:
  Tensor features_;
  std::vector<int> labels_;
  std::vector<Edge> edges_;
  std::array<std::vector<std::size_t>, 3> splits_;
  std::size_t n_classes_ = 0;
  std::size_t dropped_self_loops_ = 0;
  std::size_t dropped_duplicates_ = 0;
};

struct SplitReport {
  std::array<std::size_t, 3> counts{};
  /// histogram[split][class]
  std::array<std::vector<std::size_t>, 3> histogram;
};

/// Checks every Graph invariant; throws ValidationError on violation.
SplitReport validate(const Graph& graph);

struct LoadOptions {
  bool row_normalize = false;
};

/// Reads features.csv, labels.csv, edges.csv and splits.json from `dir`.
Graph load_dataset(const std::filesystem::path& dir, const LoadOptions& opts = {});
/// Writes the same four files; features use round-trip precision.
void save_dataset(const Graph& graph, const std::filesystem::path& dir);

/// Symmetric 0/1 adjacency of an edge list (no diagonal).
CsrMatrix adjacency_matrix(std::size_t n, const std::vector<Edge>& edges);
/// Canonical undirected edges of a symmetric matrix's support (diagonal ignored).
std::vector<Edge> support_edges(const CsrMatrix& m);

}  // namespace cogsl
