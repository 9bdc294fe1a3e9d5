// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cogsl/error.hpp"
#include "cogsl/gradcheck.hpp"
#include "cogsl/robustness.hpp"

using namespace cogsl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path config_path(const std::string& name) { return fs::path(COGSL_SOURCE_DIR) / "configs" / (name + ".json"); }

// A config whose data_dir is missing still yields a RunConfig, so the dataset reports as absent.
RunConfig config_for(const std::string& name) {
  try {
    return load_config(config_path(name));
  } catch (const LoadError&) {
    RunConfig cfg = dataset_defaults(name);
    cfg.data_dir = fs::path(COGSL_SOURCE_DIR) / "data" / name;
    return cfg;
  }
}

bool dataset_present(const RunConfig& cfg) { return fs::exists(cfg.data_dir / "features.csv"); }

std::vector<std::uint64_t> seeds() { return parse_seed_list("0..9"); }

Graph random_graph(std::size_t n, double p, std::size_t d, std::size_t classes, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor x(n, d);
  for (double& v : x.data()) v = u(rng);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
  std::vector<std::size_t> tr, va, te;
  for (std::size_t i = 0; i < n; ++i) (i < n / 2 ? tr : i < 3 * n / 4 ? va : te).push_back(i);
  return Graph(std::move(x), std::move(labels), std::move(e), {tr, va, te});
}

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  auto results = gradcheck::run(gradcheck::registry());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double worst = 0.0;
  std::string worst_name;
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass && r.rel_error < 1e-4;
    if (r.rel_error >= worst) {
      worst = r.rel_error;
      worst_name = r.name;
    }
  }
  return {all && secs < 120.0,
          fmt::format("{} cases, max rel error {:.2e} ({}), {:.2f}s", results.size(), worst, worst_name, secs)};
}

Outcome ppr_consistency() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  bool identity = true;
  for (int k = 0; k < 20; ++k) {
    Graph g = random_graph(50, 0.08, 3, 2, rng);
    Tensor cf = ppr_dense(g, 0.15, PprMode::closed_form);
    Tensor pi = ppr_dense(g, 0.15, PprMode::power_iteration, 1e-12);
    for (std::size_t i = 0; i < cf.size(); ++i) worst = std::max(worst, std::abs(cf[i] - pi[i]));
    for (auto mode : {PprMode::closed_form, PprMode::power_iteration}) {
      Tensor s = ppr_dense(g, 1.0, mode);
      for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j) identity = identity && s(i, j) == (i == j ? 1.0 : 0.0);
    }
  }
  return {worst <= 1e-8 && identity,
          fmt::format("max |closed - power| {:.2e} over 20 graphs; alpha=1 identity {}", worst, identity)};
}

Outcome structural_invariants() {
  std::mt19937_64 rng(77);
  double mass = 0.0, beta = 0.0, fused = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::uniform_int_distribution<std::size_t> size(4, 24);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = size(rng);
    Graph g = random_graph(n, 0.1 + 0.4 * unit(rng), 3, 3, rng);
    const double mu1 = 1.0 - unit(rng), mu2 = 1.0 - unit(rng);

    View v1 = adjacency_view(g, unit(rng) < 0.5);
    ScopeSet s1 = scope_khop(v1.kind == ViewKind::adjacency && v1.weights.nnz() ? v1 : v1, 1 + k % 2);
    View v2 = ppr_diffusion(g, 0.05 + 0.9 * unit(rng), PprMode::closed_form);
    ScopeSet s2 = scope_toph(v2, std::min<std::size_t>(n, 1 + k % 5));

    estimator::EstimatorParams e1{"est1", mu1}, e2{"est2", mu2};
    ParamSet params;
    const std::uint64_t seed = rng();
    estimator::init_params(params, e1, 3, 4, seed);
    estimator::init_params(params, e2, 3, 4, seed + 1);
    fusion::ClassifierParams c1{"cls1"}, c2{"cls2"};
    fusion::init_classifier(params, c1, 3, 3, seed + 2);
    fusion::init_classifier(params, c2, 3, 3, seed + 3);

    estimator::ViewEstimator est1(v1, s1, e1), est2(v2, s2, e2);
    nd::Tape tape;
    CsrMatrix x = CsrMatrix::from_dense(g.features());
    auto ves1 = est1.estimate(tape, x, params, false);
    auto ves2 = est2.estimate(tape, x, params, false);
    auto o1 = fusion::predict(ves1, x, params, c1, false);
    auto o2 = fusion::predict(ves2, x, params, c2, false);
    fusion::FusionConfig fc;
    fc.epsilon = 0.05 + unit(rng);
    fc.lambda = unit(rng);
    auto [b1, b2] = fusion::fuse_weights(fusion::confidence(o1, fc), fusion::confidence(o2, fc));
    auto support = pattern_union(*est1.support(), *est2.support());
    auto star = fusion::fuse_views(ves1, ves2, b1, b2, support).value();
    const CsrMatrix m1 = ves1.value(), m2 = ves2.value();
    for (std::size_t i = 0; i < n; ++i) {
      mass = std::max(mass, std::abs(m1.row_sum(i) - (v1.weights.row_sum(i) + mu1)));
      mass = std::max(mass, std::abs(m2.row_sum(i) - (v2.weights.row_sum(i) + mu2)));
      const double bb1 = b1.value()[i], bb2 = b2.value()[i];
      beta = std::max(beta, std::abs(bb1 + bb2 - 1.0));
      fused = std::max(fused, std::abs(star.row_sum(i) - (bb1 * m1.row_sum(i) + bb2 * m2.row_sum(i))));
    }
  }
  return {mass <= 1e-10 && beta <= 1e-15 && fused <= 1e-10,
          fmt::format("1000 instances: row mass {:.1e}, beta sum {:.1e}, fused mass {:.1e}", mass, beta, fused)};
}

double infonce_oracle(const Tensor& a, const Tensor& b, double tau) {
  const std::size_t n = a.rows();
  auto unit = [](const Tensor& m, std::size_t r) {
    std::vector<double> v(m.row(r).begin(), m.row(r).end());
    double s = 0;
    for (double x : v) s += x * x;
    for (double& x : v) x /= std::sqrt(s);
    return v;
  };
  auto sim = [&](std::size_t i, std::size_t j) {
    auto u = unit(a, i), v = unit(b, j);
    double d = 0;
    for (std::size_t c = 0; c < u.size(); ++c) d += u[c] * v[c];
    return std::exp(d / tau);
  };
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double ra = 0, cb = 0;
    for (std::size_t k = 0; k < n; ++k) {
      ra += sim(i, k);
      cb += sim(k, i);
    }
    total += std::log(sim(i, i) / ra) + std::log(sim(i, i) / cb);
  }
  return -total / (2.0 * static_cast<double>(n));
}

Outcome infonce_oracle_check() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0, ident = 0.0;
  std::vector<std::size_t> batch{0, 1, 2, 3, 4, 5, 6, 7};
  for (int k = 0; k < 100; ++k) {
    Tensor a(8, 5), b(8, 5);
    for (double& v : a.data()) v = g(rng);
    for (double& v : b.data()) v = g(rng);
    const double tau = 0.1 + 0.9 * (k % 10) / 9.0;
    nd::Tape t;
    const double got = mi::infonce(t.constant(a), t.constant(b), batch, tau).value().item();
    worst = std::max(worst, std::abs(got - infonce_oracle(a, b, tau)));
    Tensor same(8, 5, g(rng));
    const double l = mi::infonce(t.constant(same), t.constant(same), batch, tau).value().item();
    ident = std::max(ident, std::abs(l - std::log(8.0)));
  }
  return {worst <= 1e-10 && ident <= 1e-9,
          fmt::format("max |loss - oracle| {:.1e}; identical rows |loss - ln 8| {:.1e}", worst, ident)};
}

Outcome metric_oracle() {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2}, pred{0, 1, 1, 1, 2, 0};
  const std::vector<std::vector<std::size_t>> cm_want{{1, 1, 0}, {0, 2, 0}, {1, 0, 1}};
  const double macro_want = (0.5 + 0.8 + 2.0 / 3.0) / 3.0;
  const double micro_want = 4.0 / 6.0;
  const bool ok = confusion_matrix(truth, pred, 3) == cm_want &&
                  std::abs(f1_macro(truth, pred, 3) - macro_want) < 1e-15 &&
                  std::abs(f1_micro(truth, pred, 3) - micro_want) < 1e-15;
  return {ok, fmt::format("f1_macro {:.6f} (want {:.6f}), f1_micro {:.6f} (want {:.6f})", f1_macro(truth, pred, 3),
                          macro_want, f1_micro(truth, pred, 3), micro_want)};
}

// ---------------------------------------------------------------------------

struct SeedScores {
  std::vector<double> cogsl;
  std::vector<double> gcn;
};

SeedScores clean_scores(const RunConfig& cfg) {
  Graph g = prepare_graph(load_dataset(cfg.data_dir), cfg);
  SeedScores s;
  for (auto seed : seeds()) {
    ViewSources src = view_sources(g, cfg);
    BasicViews views = build_basic_views(g.n_nodes(), cfg, src, src, seed);
    s.cogsl.push_back(run_cogsl(g, views, cfg, seed).test.f1_micro * 100.0);
    s.gcn.push_back(run_baseline(g, views.v1, cfg, seed).f1_micro * 100.0);
  }
  return s;
}

struct DatasetRun {
  bool present = false;
  Summary cogsl;
  Summary gcn;
};

struct Robustness {
  bool present = false;
  std::map<std::string, double> acc;  // "<attack>/<model>" -> mean accuracy
  SeedScores clean;
};

std::string key(AttackKind a, const std::string& model) { return std::string(to_string(a)) + "/" + model; }

Robustness cancer_suite(const RunConfig& cfg) {
  Robustness r;
  if (!(r.present = dataset_present(cfg))) return r;
  Graph raw = load_dataset(cfg.data_dir);
  DefenseOptions opts;
  opts.include_clean = true;
  opts.models = {"cogsl_all", "gcn"};
  std::vector<AttackSpec> grid{{AttackKind::edge_delete, 0.15, AttackTarget::both, 0},
                               {AttackKind::feature_noise, 0.5, AttackTarget::features, 0}};
  auto rows = run_defense_suite(raw, cfg, grid, opts);
  std::map<std::string, std::vector<double>> acc;
  for (const auto& row : rows) {
    acc[key(row.attack, row.model)].push_back(row.metrics.accuracy * 100.0);
    if (row.attack == AttackKind::none)
      (row.model == "gcn" ? r.clean.gcn : r.clean.cogsl).push_back(row.metrics.f1_micro * 100.0);
  }
  for (const auto& [k, v] : acc) r.acc[k] = summarize(v).mean;
  return r;
}

DatasetRun plain_run(const RunConfig& cfg) {
  DatasetRun d;
  if (!(d.present = dataset_present(cfg))) return d;
  SeedScores s = clean_scores(cfg);
  d.cogsl = summarize(s.cogsl);
  d.gcn = summarize(s.gcn);
  return d;
}

Outcome variant_ordering(const RunConfig& base) {
  if (!dataset_present(base)) return {false, "blocked: citeseer dataset missing under " + base.data_dir.string()};
  Graph g = prepare_graph(load_dataset(base.data_dir), base);
  std::map<std::string, double> macro;
  for (const char* v : {"adaptive", "average", "attention"}) {
    RunConfig cfg = base;
    cfg.train.fusion.variant = fusion::parse_variant(v);
    std::vector<double> scores;
    for (auto seed : seeds()) {
      ViewSources src = view_sources(g, cfg);
      scores.push_back(run_cogsl(g, build_basic_views(g.n_nodes(), cfg, src, src, seed), cfg, seed).test.f1_macro *
                       100.0);
    }
    macro[v] = summarize(scores).mean;
  }
  const bool ok = macro["adaptive"] + 0.3 >= macro["average"] && macro["adaptive"] + 0.3 >= macro["attention"];
  return {ok, fmt::format("F1-macro adaptive {:.2f}, average {:.2f}, attention {:.2f}", macro["adaptive"],
                          macro["average"], macro["attention"])};
}

Outcome determinism(const RunConfig& cfg) {
  if (!dataset_present(cfg)) return {false, "blocked: wine dataset missing"};
  Graph g = prepare_graph(load_dataset(cfg.data_dir), cfg);
  auto once = [&] {
    std::ostringstream log;
    ViewSources src = view_sources(g, cfg);
    run_cogsl(g, build_basic_views(g.n_nodes(), cfg, src, src, 3), cfg, 3, &log);
    return log.str();
  };
  const std::string a = once(), b = once();
  return {!a.empty() && a == b, fmt::format("two wine runs (seed 3): {} bytes each, identical {}", a.size(), a == b)};
}

std::string fmt_summary(const char* name, const DatasetRun& d) {
  if (!d.present) return fmt::format("{} missing", name);
  return fmt::format("{} {:.2f}±{:.2f} (gcn {:.2f}±{:.2f})", name, d.cogsl.mean, d.cogsl.std, d.gcn.mean, d.gcn.std);
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  int failures = 0;
  auto report = [&](int id, const char* title, const Outcome& o) {
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };

  report(1, "gradient check", gradient_check());
  report(2, "diffusion consistency", ppr_consistency());
  report(3, "structural invariants", structural_invariants());
  report(4, "InfoNCE oracle", infonce_oracle_check());
  report(5, "metric oracle", metric_oracle());

  const RunConfig wine = config_for("wine");
  const RunConfig cancer = config_for("cancer");
  const RunConfig citeseer = config_for("citeseer");

  const DatasetRun w = plain_run(wine);
  const Robustness rc = cancer_suite(cancer);
  DatasetRun c;
  if ((c.present = rc.present)) {
    c.cogsl = summarize(rc.clean.cogsl);
    c.gcn = summarize(rc.clean.gcn);
  }
  const DatasetRun cs = plain_run(citeseer);

  {
    bool ok = w.present && c.present && cs.present && w.cogsl.mean >= 94.0 && c.cogsl.mean >= 92.0 &&
              cs.cogsl.mean >= 70.0;
    std::string detail = fmt::format("{}; {}; {}", fmt_summary("wine", w), fmt_summary("cancer", c),
                                     fmt_summary("citeseer", cs));
    if (!cs.present) detail = "blocked: citeseer dataset missing; " + detail;
    report(6, "desk-scale targets", {ok, detail});
  }
  {
    auto dominates = [](const DatasetRun& d) { return d.present && d.cogsl.mean >= d.gcn.mean; };
    bool ok = dominates(w) && dominates(c) && dominates(cs);
    std::string detail = fmt::format("wine {}, cancer {}, citeseer {}", w.present ? (dominates(w) ? "yes" : "no") : "missing",
                                     c.present ? (dominates(c) ? "yes" : "no") : "missing",
                                     cs.present ? (dominates(cs) ? "yes" : "no") : "missing");
    if (!cs.present) detail = "blocked: citeseer dataset missing; " + detail;
    report(7, "backbone dominance", {ok, detail});
  }
  {
    Outcome o{false, "blocked: cancer dataset missing"};
    if (rc.present) {
      auto acc = [&](AttackKind a, const char* m) { return rc.acc.at(key(a, m)); };
      const double clean_c = acc(AttackKind::none, "cogsl_all"), clean_g = acc(AttackKind::none, "gcn");
      const double del_c = clean_c - acc(AttackKind::edge_delete, "cogsl_all");
      const double del_g = clean_g - acc(AttackKind::edge_delete, "gcn");
      const double noi_c = clean_c - acc(AttackKind::feature_noise, "cogsl_all");
      const double noi_g = clean_g - acc(AttackKind::feature_noise, "gcn");
      o.pass = del_c < del_g && noi_c < noi_g;
      o.detail = fmt::format("drop under 15% deletion cogsl {:.2f} vs gcn {:.2f}; under noise 0.5 cogsl {:.2f} vs gcn {:.2f}",
                             del_c, del_g, noi_c, noi_g);
    }
    report(8, "cancer robustness", o);
  }
  report(9, "fusion ordering", variant_ordering(citeseer));
  report(10, "determinism", determinism(wine));

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
