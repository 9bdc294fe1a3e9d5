#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cogsl/trainer.hpp"

namespace cogsl {

enum class BasicView { A, S, K, A_sub };
BasicView parse_basic_view(std::string_view name);
const char* to_string(BasicView v);

enum class FeatureNorm { none, row, standardize };
FeatureNorm parse_feature_norm(std::string_view name);
const char* to_string(FeatureNorm f);

struct ViewOptions {
  double ppr_alpha = 0.15;
  /// Entries kept per PPR row; 0 means scope_h.
  std::size_t ppr_keep = 0;
  /// k of the K view.
  std::size_t knn_k = 9;
  /// k of the KNN graph used as adjacency when a dataset has no edges.
  std::size_t knn_init_k = 9;
  /// Fraction of edges kept by the A_sub view.
  double subgraph_keep = 0.7;
  /// Hops of the k-hop scope (A, K, A_sub views).
  std::size_t scope_k = 1;
  /// Entries of the top-h scope (S view).
  std::size_t scope_h = 100;
};

struct RunConfig {
  std::string dataset;
  std::filesystem::path data_dir;
  std::array<BasicView, 2> views{BasicView::A, BasicView::S};
  ViewOptions view;
  FeatureNorm feature_norm = FeatureNorm::none;
  TrainConfig train;
  BaselineConfig baseline;
  std::filesystem::path output_dir = "runs";
};

/// Per-dataset defaults (view pair, optimiser schedule, fusion and scope
/// settings). Unknown names get the generic defaults.
RunConfig dataset_defaults(std::string_view name);

/// Reads a JSON config: "dataset" selects the defaults, every other key
/// overrides one field. A relative data_dir is resolved against the
/// config file's directory. Throws LoadError / ArgumentError.
RunConfig load_config(const std::filesystem::path& path);

/// Applies the keys of a JSON object to `cfg`; unknown keys throw.
void apply_json(RunConfig& cfg, std::string_view json_text);
/// One override; `value` is parsed as JSON, falling back to a string.
void set_option(RunConfig& cfg, std::string_view key, std::string_view value);
/// Flat JSON form accepted by apply_json.
std::string to_json(const RunConfig& cfg);

/// "3", "0..9" (inclusive) or "1,4,7".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

struct Summary {
  double mean = 0.0;
  /// Population standard deviation.
  double std = 0.0;
};
Summary summarize(const std::vector<double>& values);

}  // namespace cogsl
