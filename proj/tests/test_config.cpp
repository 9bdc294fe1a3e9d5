#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cogsl/error.hpp"
#include "cogsl/pipeline.hpp"
#include "test_util.hpp"

using namespace cogsl;
namespace fs = std::filesystem;

TEST(Config, DatasetDefaults) {
  auto c = dataset_defaults("citeseer");
  EXPECT_EQ(c.train.T, 200u);
  EXPECT_EQ(c.train.rho_theta, 5u);
  EXPECT_EQ(c.train.rho_phi, 10u);
  EXPECT_EQ(c.train.rho_omega, 5u);
  EXPECT_DOUBLE_EQ(c.train.lr_omega, 0.001);
  EXPECT_EQ(c.views[0], BasicView::A);
  EXPECT_EQ(c.views[1], BasicView::S);
  auto w = dataset_defaults("wine");
  EXPECT_EQ(w.views[0], BasicView::S);
  EXPECT_EQ(w.views[1], BasicView::K);
  auto g = dataset_defaults("something_else");
  EXPECT_EQ(g.view.knn_k, 9u);
  EXPECT_DOUBLE_EQ(g.view.subgraph_keep, 0.7);
}

TEST(Config, LoadResolvesDataDirAndOverrides) {
  auto dir = fs::temp_directory_path() / "cogsl_cfg";
  fs::create_directories(dir);
  fs::create_directories(dir / "../cancer_data");
  {
    std::ofstream(dir / "c.json") << R"({"dataset":"cancer","data_dir":"../cancer_data","T":7,"eta":0.5,"mu":0.3})";
  }
  auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.dataset, "cancer");
  EXPECT_EQ(c.data_dir.lexically_normal(), (dir / "../cancer_data").lexically_normal());
  EXPECT_EQ(c.train.T, 7u);
  EXPECT_DOUBLE_EQ(c.train.eta, 0.5);
  EXPECT_DOUBLE_EQ(c.train.est2.mu, 0.3);
  EXPECT_EQ(c.train.rho_phi, dataset_defaults("cancer").train.rho_phi);
}

TEST(Config, Errors) {
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), LoadError);
  RunConfig c;
  EXPECT_THROW(apply_json(c, R"({"no_such_key":1})"), ArgumentError);
  EXPECT_THROW(apply_json(c, R"({"T":"many"})"), ArgumentError);
  EXPECT_THROW(apply_json(c, R"({"views":["A"]})"), ArgumentError);
  EXPECT_THROW(set_option(c, "variant", "max"), ArgumentError);
}

TEST(Config, SetOptionAndJsonRoundTrip) {
  RunConfig c = dataset_defaults("wine");
  set_option(c, "variant", "attention");
  set_option(c, "tau", "0.2");
  set_option(c, "views", R"(["A","K"])");
  EXPECT_EQ(c.train.fusion.variant, fusion::Variant::attention);
  EXPECT_DOUBLE_EQ(c.train.mi.tau, 0.2);
  RunConfig d;
  apply_json(d, to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
}

TEST(Config, SeedLists) {
  EXPECT_EQ(parse_seed_list("0..9").size(), 10u);
  EXPECT_EQ(parse_seed_list("3"), (std::vector<std::uint64_t>{3}));
  EXPECT_EQ(parse_seed_list("1,4,7"), (std::vector<std::uint64_t>{1, 4, 7}));
  EXPECT_THROW(parse_seed_list("5..2"), ArgumentError);
  EXPECT_THROW(parse_seed_list("x"), ArgumentError);
}

TEST(Config, SummaryMatchesHandValues) {
  auto s = summarize({90.0, 92.0, 94.0, 96.0});
  EXPECT_DOUBLE_EQ(s.mean, 93.0);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0));
}

TEST(Pipeline, EnsureEdgesBuildsKnnOnlyWhenEmpty) {
  auto g = test::make_graph(20, {}, 4, 2, 3);
  RunConfig c;
  c.view.knn_init_k = 3;
  auto with = ensure_edges(g, c);
  EXPECT_GT(with.n_edges(), 0u);
  EXPECT_EQ(with.edges(), knn_edges(g.features(), 3));
  auto already = test::make_graph(20, test::path_edges(20));
  EXPECT_EQ(ensure_edges(already, c).edges(), already.edges());
}

TEST(Pipeline, StandardizeHasZeroMeanUnitVariance) {
  auto g = test::make_graph(30, {}, 3, 2, 8);
  RunConfig c;
  c.feature_norm = FeatureNorm::standardize;
  auto x = normalize_graph_features(g, c).features();
  for (std::size_t j = 0; j < 3; ++j) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 30; ++i) m += x(i, j);
    m /= 30;
    for (std::size_t i = 0; i < 30; ++i) v += (x(i, j) - m) * (x(i, j) - m);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / 30, 1.0, 1e-12);
  }
}

TEST(Pipeline, BasicViewsAndScopes) {
  auto g = test::make_graph(30, test::random_edges(30, 0.15, 2), 4, 3, 2);
  RunConfig c;
  c.view.knn_k = 4;
  c.view.scope_h = 6;
  auto src = view_sources(g, c);
  auto s = build_view(30, BasicView::S, src.graph_edges, c.view, 1);
  EXPECT_EQ(s.kind, ViewKind::diffusion);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_LE(s.weights.pattern->row_end(i) - s.weights.pattern->row_begin(i), 6u);
  auto sub = build_view(30, BasicView::A_sub, src.graph_edges, c.view, 1);
  EXPECT_EQ(sub.weights.nnz(), 2 * static_cast<std::size_t>(std::floor(0.7 * g.n_edges())));
  auto k = build_view(30, BasicView::K, src.knn_edges, c.view, 1);
  EXPECT_EQ(k.kind, ViewKind::knn);
  auto scope = build_scope(s, BasicView::S, c.view);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_GE(scope[i].size(), 6u);
  c.views = {BasicView::A, BasicView::S};
  auto bv = build_basic_views(30, c, src, src, 1);
  EXPECT_EQ(bv.v1.kind, ViewKind::adjacency);
  EXPECT_EQ(bv.s1.size(), 30u);
}
