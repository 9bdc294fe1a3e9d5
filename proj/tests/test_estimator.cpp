#include <gtest/gtest.h>

#include <cmath>

#include "cogsl/error.hpp"
#include "cogsl/estimator.hpp"
#include "test_util.hpp"

using namespace cogsl;
using namespace cogsl::estimator;

namespace {

ScopeSet full_scope(std::size_t n) {
  ScopeSet s;
  s.lists.assign(n, {});
  for (auto& l : s.lists)
    for (std::size_t j = 0; j < n; ++j) l.push_back(static_cast<Index>(j));
  return s;
}

CsrMatrix empty_view(std::size_t n) {
  return CsrMatrix(SparsePattern::from_rows(n, n, std::vector<std::vector<Index>>(n)), {});
}

}  // namespace

TEST(Embed, ZeroViewIsActivatedProduct) {
  nd::Tape t;
  auto x = CsrMatrix::from_dense(test::random_tensor(5, 3, 1));
  auto w = test::random_tensor(3, 4, 2);
  auto z = embed(t.constant(empty_view(5)), x, t.constant(w), nd::Activation::elu).value();
  auto xd = x.to_dense();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 3; ++k) s += xd(i, k) * w(k, j);
      EXPECT_NEAR(z(i, j), s > 0 ? s : std::expm1(s), 1e-14);
    }
}

TEST(PairScores, ZeroWeightsAndEqualEmbeddings) {
  nd::Tape t;
  auto scope = full_scope(4).pattern();
  auto z = t.constant(test::random_tensor(4, 3, 3));
  auto s0 = pair_scores(z, scope, t.constant(Tensor(6, 1)), t.constant(Tensor::scalar(0.0)));
  for (double v : s0.values.value().data()) EXPECT_EQ(v, 0.0);
  auto same = t.constant(Tensor(4, 3, 0.7));
  auto s1 = pair_scores(same, scope, t.constant(test::random_tensor(6, 1, 4)), t.constant(Tensor::scalar(0.3)));
  for (double v : s1.values.value().data()) EXPECT_DOUBLE_EQ(v, s1.values.value()[0]);
}

TEST(PairScores, MatchesDenseConcatOracle) {
  nd::Tape t;
  const std::size_t n = 6, d = 3;
  auto zt = test::random_tensor(n, d, 5);
  auto wt = test::random_tensor(2 * d, 1, 6);
  const double b = 0.17;
  auto scope = full_scope(n).pattern();
  auto s = pair_scores(t.constant(zt), scope, t.constant(wt), t.constant(Tensor::scalar(b))).value();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double want = b;
      for (std::size_t k = 0; k < d; ++k) want += wt[k] * zt(i, k) + wt[d + k] * zt(j, k);
      EXPECT_NEAR(s.at(i, j), want, 1e-14);
    }
}

TEST(Probabilities, UniformAndSingleton) {
  nd::Tape t;
  ScopeSet s{{{0, 1, 2, 3}, {1}, {0, 2}, {1, 2, 3, 0}}};
  auto pat = s.pattern();
  auto scores = t.constant(CsrMatrix(pat, std::vector<double>(pat->nnz(), 2.5)));
  auto p = estimate_probabilities(scores).value();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(p.at(0, j), 0.25);
  EXPECT_EQ(p.at(1, 1), 1.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(p.row_sum(i), 1.0, 1e-15);
}

TEST(Probabilities, MatchesGatherSoftmaxScatterOracle) {
  nd::Tape t;
  ScopeSet s{{{0, 3}, {1, 2, 4}, {2}, {0, 1, 2, 3, 4}, {4, 0}}};
  auto pat = s.pattern();
  std::vector<double> raw(pat->nnz());
  auto rnd = test::random_tensor(pat->nnz(), 1, 7, -4, 4);
  for (std::size_t e = 0; e < raw.size(); ++e) raw[e] = rnd[e];
  auto p = estimate_probabilities(t.constant(CsrMatrix(pat, raw))).value();
  for (std::size_t r = 0; r < 5; ++r) {
    double z = 0;
    for (auto e = pat->row_begin(r); e < pat->row_end(r); ++e) z += std::exp(raw[e]);
    for (auto e = pat->row_begin(r); e < pat->row_end(r); ++e) EXPECT_NEAR(p.values[e], std::exp(raw[e]) / z, 1e-15);
  }
}

TEST(Blend, CasesAndDomain) {
  auto g = test::make_graph(5, test::path_edges(5));
  View base = adjacency_view(g, false);
  ScopeSet s = full_scope(5);
  std::vector<double> vals(25, 0.2);
  View p{CsrMatrix(s.pattern(), vals), ViewKind::estimated};

  View zero{empty_view(5), ViewKind::adjacency};
  auto half = blend(zero, p, 0.5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(half.weights.row_sum(i), 0.5, 1e-15);

  auto tiny = blend(base, p, 1e-9);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(tiny.weights.row_sum(i) - base.weights.row_sum(i), 1e-9, 1e-15);
  for (std::size_t e = 0; e < base.weights.nnz(); ++e) {
    auto r = base.weights.pattern->entry_row()[e], c = base.weights.pattern->col()[e];
    EXPECT_GT(tiny.weights.at(r, c), 0.0);
  }

  for (double mu : {0.1, 0.5, 1.0}) {
    auto out = blend(base, p, mu);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(out.weights.at(i, j), base.weights.at(i, j) + mu * 0.2);
  }
  EXPECT_THROW(blend(base, p, 0.0), ArgumentError);
  EXPECT_THROW(blend(base, p, 1.5), ArgumentError);
}

TEST(ViewEstimator, RowMassAndSupport) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = test::make_graph(12, test::random_edges(12, 0.25, seed), 4, 2, seed);
    View v = adjacency_view(g, false);
    auto scope = scope_khop(v, 2);
    EstimatorParams cfg;
    cfg.mu = 0.3 + 0.03 * static_cast<double>(seed);
    ParamSet params;
    init_params(params, cfg, 4, 8, seed);
    ViewEstimator est(v, scope, cfg);
    nd::Tape t;
    auto x = CsrMatrix::from_dense(g.features());
    auto ves = est.estimate(t, x, params, false).value();
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_NEAR(ves.row_sum(i), v.weights.row_sum(i) + cfg.mu, 1e-10);
      for (auto j : scope[i]) EXPECT_GT(ves.at(i, j), 0.0);
    }
    for (double w : ves.values) EXPECT_GE(w, 0.0);
    EXPECT_TRUE(*ves.pattern == *pattern_union(*v.weights.pattern, *scope.pattern()));
  }
}

TEST(ViewEstimator, ParamsLiveInOmega) {
  ParamSet params;
  EstimatorParams cfg;
  cfg.prefix = "est2";
  init_params(params, cfg, 5, 16, 1);
  EXPECT_EQ(params.group("est2.W"), Group::omega);
  EXPECT_EQ(params.value("est2.W").cols(), 16u);
  EXPECT_EQ(params.value("est2.w_pair").rows(), 32u);
  EXPECT_EQ(params.group("est2.b_pair"), Group::omega);
}
