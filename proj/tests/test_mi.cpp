#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cogsl/error.hpp"
#include "cogsl/mi.hpp"
#include "cogsl/views.hpp"
#include "test_util.hpp"

using namespace cogsl;
using namespace cogsl::mi;

namespace {

// Direct transcription of the symmetric loss with explicit loops.
double infonce_oracle(const Tensor& a, const Tensor& b, const std::vector<std::size_t>& batch, double tau) {
  auto unit = [](const Tensor& m, std::size_t r) {
    std::vector<double> v(m.row(r).begin(), m.row(r).end());
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0)
      for (double& x : v) x /= n;
    return v;
  };
  auto sim = [&](std::size_t i, std::size_t j) {
    auto u = unit(a, batch[i]);
    auto v = unit(b, batch[j]);
    double d = 0;
    for (std::size_t c = 0; c < u.size(); ++c) d += u[c] * v[c];
    return d / tau;
  };
  double total = 0;
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) {
    double den_a = 0, den_b = 0;
    for (std::size_t k = 0; k < n; ++k) {
      den_a += std::exp(sim(i, k));
      den_b += std::exp(sim(k, i));
    }
    total += std::log(std::exp(sim(i, i)) / den_a) + std::log(std::exp(sim(i, i)) / den_b);
  }
  return -total / (2.0 * static_cast<double>(n));
}

double run_infonce(const Tensor& a, const Tensor& b, const std::vector<std::size_t>& batch, double tau) {
  nd::Tape t;
  return infonce(t.constant(a), t.constant(b), batch, tau).value().item();
}

struct Fixture {
  Graph g = test::make_graph(10, test::random_edges(10, 0.3, 3), 5, 2, 4);
  CsrMatrix x = CsrMatrix::from_dense(g.features());
  MIParams cfg;
  ParamSet params;
  Fixture() { init_params(params, cfg, 5, 11); }
};

}  // namespace

TEST(InfoNce, MatchesDoubleLoopOracle) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto a = test::random_tensor(8, 6, 2 * seed + 1);
    auto b = test::random_tensor(8, 6, 2 * seed + 2);
    std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};
    for (double tau : {0.5, 0.2, 1.0})
      EXPECT_NEAR(run_infonce(a, b, batch, tau), infonce_oracle(a, b, batch, tau), 1e-10) << seed;
  }
}

TEST(InfoNce, SubBatchMatchesOracle) {
  auto a = test::random_tensor(12, 4, 1), b = test::random_tensor(12, 4, 2);
  std::vector<std::size_t> batch{1, 4, 5, 9};
  EXPECT_NEAR(run_infonce(a, b, batch, 0.5), infonce_oracle(a, b, batch, 0.5), 1e-10);
}

TEST(InfoNce, IdenticalEmbeddingsGiveLogBatch) {
  Tensor same(8, 3, 0.4);
  std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};
  for (double tau : {0.5, 0.05, 3.0}) EXPECT_NEAR(run_infonce(same, same, batch, tau), std::log(8.0), 1e-9);
}

TEST(InfoNce, TwoNodeAnalytic) {
  Tensor a(2, 2, std::vector<double>{1, 0, 0, 1});
  Tensor b = a;
  const double tau = 0.5;
  // Row and column terms coincide: -ln(e^{1/tau} / (e^{1/tau} + 1)).
  const double want = -std::log(std::exp(1 / tau) / (std::exp(1 / tau) + 1.0));
  EXPECT_NEAR(run_infonce(a, b, {0, 1}, tau), want, 1e-14);
}

TEST(InfoNce, EdgeCases) {
  Tensor a = test::random_tensor(4, 3, 1);
  EXPECT_EQ(run_infonce(a, a, {2}, 0.5), 0.0);
  EXPECT_THROW(run_infonce(a, a, {}, 0.5), ArgumentError);
  EXPECT_THROW(run_infonce(a, a, {0, 1}, 0.0), ArgumentError);
  Tensor z(3, 3);
  EXPECT_NEAR(run_infonce(z, z, {0, 1, 2}, 0.5), std::log(3.0), 1e-12);
}

TEST(MiEmbed, ZeroViewIsPreluOfProduct) {
  Fixture f;
  nd::Tape t;
  auto v = t.constant(CsrMatrix(SparsePattern::from_rows(10, 10, std::vector<std::vector<Index>>(10)), {}));
  auto h = mi_embed(v, f.x, f.params, Which::v1, false).value();
  ASSERT_EQ(h.cols(), 16u);
  const auto& w = f.params.value(encoder_weight(Which::v1));
  auto xd = f.x.to_dense();
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 5; ++k) s += xd(i, k) * w(k, j);
      EXPECT_NEAR(h(i, j), s > 0 ? s : 0.25 * s, 1e-14);
    }
}

TEST(Projection, ZeroWeightsGiveBiasAndSharedWeights) {
  Fixture f;
  f.params.value(kProjW0).fill(0.0);
  f.params.value(kProjW1).fill(0.0);
  f.params.value(kProjB1) = test::random_tensor(1, 16, 3);
  nd::Tape t;
  auto proj = Projection::bind(t, f.params, f.cfg, false);
  auto out = proj(t.constant(test::random_tensor(4, 16, 5))).value();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(out(i, j), f.params.value(kProjB1)[j]);

  Fixture g;
  nd::Tape t2;
  auto p2 = Projection::bind(t2, g.params, g.cfg, false);
  auto h = t2.constant(test::random_tensor(4, 16, 6));
  EXPECT_EQ(p2(h).value(), p2(h).value());
  for (auto& [name, e] : g.params.entries()) EXPECT_EQ(e.group, Group::phi) << name;
}

TEST(MiTotal, SumOfThreeCallsAndIdenticalCase) {
  Fixture f;
  nd::Tape t;
  auto view = t.constant(adjacency_view(f.g, false).weights);
  std::vector<std::size_t> batch{0, 2, 3, 5, 7, 9};
  auto losses = mi_total(view, view, view, f.x, f.params, f.cfg, batch, false);
  auto proj = Projection::bind(t, f.params, f.cfg, false);
  auto hs = proj(mi_embed(view, f.x, f.params, Which::star, false));
  auto h1 = proj(mi_embed(view, f.x, f.params, Which::v1, false));
  auto h2 = proj(mi_embed(view, f.x, f.params, Which::v2, false));
  const double sum3 = infonce(hs, h1, batch, 0.5).value().item() + infonce(hs, h2, batch, 0.5).value().item() +
                      infonce(h1, h2, batch, 0.5).value().item();
  EXPECT_EQ(losses.total.value().item(), sum3);

  // Equal encoder weights and a constant feature matrix make every row identical.
  Fixture s;
  for (Which w : {Which::v1, Which::v2}) s.params.value(encoder_weight(w)) = s.params.value(encoder_weight(Which::star));
  CsrMatrix ones = CsrMatrix::from_dense(Tensor(10, 5, 1.0));
  nd::Tape t2;
  auto empty = t2.constant(CsrMatrix(SparsePattern::from_rows(10, 10, std::vector<std::vector<Index>>(10)), {}));
  auto same = mi_total(empty, empty, empty, ones, s.params, s.cfg, batch, false);
  EXPECT_NEAR(same.total.value().item(), 3.0 * std::log(6.0), 1e-9);
}

TEST(SampleBatch, SortedUniqueAndAllNodes) {
  std::mt19937_64 rng(3);
  auto b = sample_batch(50, 10, rng);
  ASSERT_EQ(b.size(), 10u);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(b[i - 1], b[i]);
  auto all = sample_batch(7, 0, rng);
  EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(sample_batch(7, 7, rng), all);
}
