#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cogsl/pipeline.hpp"

namespace cogsl {

enum class AttackKind { none, edge_delete, edge_add, feature_noise };
AttackKind parse_attack_kind(std::string_view name);
const char* to_string(AttackKind k);

enum class AttackTarget { view1, view2, both, features };
AttackTarget parse_attack_target(std::string_view name);
const char* to_string(AttackTarget t);

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  double rate = 0.0;
  AttackTarget target = AttackTarget::both;
  std::uint64_t seed = 0;
  /// Accept rates outside the standard grid.
  bool allow_any_rate = false;

  /// Throws ArgumentError when the rate is outside the kind's domain.
  void validate() const;
};

/// floor(rate * m), robust to decimal rates such as 0.15.
std::size_t perturbation_count(double rate, std::size_t m);

/// Removes floor(rate |E|) edges outside a random spanning forest, so every
/// connected component stays connected.
std::vector<Edge> delete_edges(std::size_t n, const std::vector<Edge>& edges, double rate, std::uint64_t seed);
/// Adds floor(rate |E|) distinct new non-loop pairs sampled uniformly.
std::vector<Edge> add_edges(std::size_t n, const std::vector<Edge>& edges, double rate, std::uint64_t seed);

Graph attack_delete_edges(const Graph& graph, double rate, std::uint64_t seed);
Graph attack_add_edges(const Graph& graph, double rate, std::uint64_t seed);
/// X + aleph * r * M, r the mean row maximum of X, M standard normal.
Tensor attack_features(const Tensor& x, double aleph, std::uint64_t seed);

/// Number of connected components of an undirected edge list.
std::size_t count_components(std::size_t n, const std::vector<Edge>& edges);

struct DefenseRow {
  std::string dataset;
  AttackKind attack = AttackKind::none;
  double rate = 0.0;
  AttackTarget target = AttackTarget::both;
  std::string model;
  std::uint64_t seed = 0;
  MetricsReport metrics;
};

struct DefenseOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  /// Also train on the clean graph (attack "none").
  bool include_clean = false;
  /// Worker threads; 0 reads COGSL_THREADS, else the hardware count.
  std::size_t threads = 0;
  /// Restricts the models that run (e.g. {"cogsl_all", "gcn"}); empty runs all.
  std::vector<std::string> models;
};

/// Poisons the raw dataset per grid point and trains the CoGSL variants and
/// the GCN baseline. Edge attacks run cogsl_view1, cogsl_view2, cogsl_all
/// and gcn; feature noise runs cogsl_all and gcn. Rows come back in grid,
/// model, seed order regardless of scheduling.
std::vector<DefenseRow> run_defense_suite(const Graph& raw, const RunConfig& cfg, const std::vector<AttackSpec>& grid,
                                          const DefenseOptions& opts);

void write_defense_csv(std::ostream& out, const std::vector<DefenseRow>& rows);
/// mean and population std of accuracy per (attack, rate, target, model).
void write_defense_summary(std::ostream& out, const std::vector<DefenseRow>& rows);

/// COGSL_THREADS if set and positive, else hardware concurrency (>= 1).
std::size_t worker_threads();

}  // namespace cogsl
