#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "cogsl/error.hpp"
#include "cogsl/robustness.hpp"
#include "test_util.hpp"

using namespace cogsl;

namespace {

// Connected graph: a path plus random chords.
std::vector<Edge> connected_edges(std::size_t n, double p, std::uint64_t seed) {
  auto e = test::path_edges(n);
  auto extra = test::random_edges(n, p, seed);
  e.insert(e.end(), extra.begin(), extra.end());
  return test::make_graph(n, e).edges();
}

RunConfig tiny_run_config() {
  RunConfig cfg = dataset_defaults("generic");
  cfg.dataset = "tiny";
  cfg.views = {BasicView::A, BasicView::K};
  cfg.view.knn_k = 3;
  cfg.train.T = 2;
  cfg.train.rho_phi = 1;
  cfg.baseline.epochs = 3;
  return cfg;
}

}  // namespace

TEST(Attack, ZeroRateIsIdentity) {
  auto e = connected_edges(30, 0.1, 1);
  EXPECT_EQ(delete_edges(30, e, 0.0, 5), e);
  EXPECT_EQ(add_edges(30, e, 0.0, 5), e);
  Tensor x = test::random_tensor(5, 3, 2);
  EXPECT_EQ(attack_features(x, 0.0, 9), x);
  EXPECT_EQ(add_edges(4, {}, 0.5, 1).size(), 0u);
}

TEST(Attack, TriangleDeletionKeepsConnectivity) {
  std::vector<Edge> tri{{0, 1}, {0, 2}, {1, 2}};
  std::set<std::vector<Edge>> outcomes;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto out = delete_edges(3, tri, 1.0 / 3.0, seed);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(count_components(3, out), 1u);
    outcomes.insert(out);
  }
  // Every one of the three edges can be the removed one.
  EXPECT_EQ(outcomes.size(), 3u);
}

TEST(Attack, DeletionCountAndConnectivityAudit) {
  const std::size_t n = 569;
  auto e = connected_edges(n, 0.03, 4);
  const auto comps = count_components(n, e);
  for (double rate : {0.05, 0.10, 0.15}) {
    auto out = delete_edges(n, e, rate, 11);
    EXPECT_EQ(out.size(), e.size() - static_cast<std::size_t>(std::floor(rate * e.size() + 1e-9)));
    EXPECT_EQ(count_components(n, out), comps);
    std::set<Edge> orig(e.begin(), e.end());
    for (const auto& x : out) EXPECT_TRUE(orig.count(x));
    EXPECT_EQ(out, delete_edges(n, e, rate, 11));
  }
}

TEST(Attack, DeletionBeyondForestFails) {
  EXPECT_THROW(delete_edges(4, test::path_edges(4), 0.5, 1), ArgumentError);
}

TEST(Attack, AdditionCountAndNoDuplicates) {
  const std::size_t n = 300;
  auto e = connected_edges(n, 0.02, 6);
  for (double rate : {0.25, 0.5, 0.75}) {
    auto out = add_edges(n, e, rate, 3);
    EXPECT_EQ(out.size(), e.size() + perturbation_count(rate, e.size()));
    std::set<Edge> uniq(out.begin(), out.end());
    EXPECT_EQ(uniq.size(), out.size());
    for (auto [a, b] : out) EXPECT_LT(a, b);
    for (const auto& x : e) EXPECT_TRUE(uniq.count(x));
  }
  EXPECT_THROW(add_edges(3, {{0, 1}, {1, 2}}, 1.0, 1), ArgumentError);
}

TEST(Attack, PerturbationCountIsRobustToDecimals) {
  EXPECT_EQ(perturbation_count(0.15, 100), 15u);
  EXPECT_EQ(perturbation_count(0.1, 30), 3u);
  EXPECT_EQ(perturbation_count(0.75, 3), 2u);
}

TEST(Attack, FeatureNoiseAmplitude) {
  Tensor ones(3, 2, 1.0);
  const double aleph = 0.5;
  double sum = 0, sq = 0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    auto out = attack_features(ones, aleph, seed);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out[i] - 1.0;
      sum += d;
      sq += d * d;
      ++count;
    }
  }
  const double mean = sum / count;
  const double sd = std::sqrt(sq / count - mean * mean);
  EXPECT_NEAR(sd, aleph, 0.05 * aleph);
  EXPECT_EQ(attack_features(ones, aleph, 3), attack_features(ones, aleph, 3));
}

TEST(AttackSpec, GridValidation) {
  AttackSpec a{AttackKind::edge_delete, 0.15};
  EXPECT_NO_THROW(a.validate());
  a.rate = 0.2;
  EXPECT_THROW(a.validate(), ArgumentError);
  a.allow_any_rate = true;
  EXPECT_NO_THROW(a.validate());
  a.rate = 1.0;
  EXPECT_THROW(a.validate(), ArgumentError);
  AttackSpec n{AttackKind::feature_noise, 0.5};
  EXPECT_NO_THROW(n.validate());
  EXPECT_EQ(parse_attack_kind("delete"), AttackKind::edge_delete);
  EXPECT_THROW(parse_attack_kind("nettack"), ArgumentError);
}

TEST(DefenseSuite, EmptyGridIsEmpty) {
  auto g = test::make_graph(20, connected_edges(20, 0.1, 2), 4, 2, 2);
  EXPECT_TRUE(run_defense_suite(g, tiny_run_config(), {}, {}).empty());
}

TEST(DefenseSuite, RunCountAudit) {
  auto g = test::make_graph(24, connected_edges(24, 0.2, 3), 4, 2, 3);
  DefenseOptions opts;
  opts.threads = 2;
  auto rows = run_defense_suite(g, tiny_run_config(), {AttackSpec{AttackKind::edge_delete, 0.05}}, opts);
  ASSERT_EQ(rows.size(), 40u);
  std::map<std::string, std::size_t> per_model;
  for (const auto& r : rows) ++per_model[r.model];
  EXPECT_EQ(per_model.size(), 4u);
  for (const auto& [m, c] : per_model) EXPECT_EQ(c, 10u) << m;

  std::ostringstream csv;
  write_defense_csv(csv, rows);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "dataset,attack,rate,target,model,seed,f1_macro,f1_micro,auc,accuracy");
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 40u);
}

TEST(DefenseSuite, ThreadCountDoesNotChangeResults) {
  auto g = test::make_graph(24, connected_edges(24, 0.2, 5), 4, 2, 5);
  DefenseOptions a, b;
  a.seeds = b.seeds = {0, 1};
  a.threads = 1;
  b.threads = 3;
  AttackSpec noise{AttackKind::feature_noise, 0.3};
  auto ra = run_defense_suite(g, tiny_run_config(), {noise}, a);
  auto rb = run_defense_suite(g, tiny_run_config(), {noise}, b);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].model, rb[i].model);
    EXPECT_EQ(ra[i].metrics.f1_micro, rb[i].metrics.f1_micro);
  }
}
