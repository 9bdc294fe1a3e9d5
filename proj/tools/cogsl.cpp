// cogsl: command-line driver for training, evaluation, attacks and diagnostics.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cogsl/config.hpp"
#include "cogsl/error.hpp"
#include "cogsl/gradcheck.hpp"
#include "cogsl/kernels.hpp"
#include "cogsl/pipeline.hpp"
#include "cogsl/robustness.hpp"

namespace fs = std::filesystem;
using namespace cogsl;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string seeds = "0";
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "JSON run config")->required();
  cmd->add_option("--set", c.overrides, "override a config key, key=value")->take_all();
  cmd->add_option("-s,--seed", c.seeds, "seed, range a..b or list a,b,c");
  cmd->add_option("-o,--out", c.out, "output directory (default: config output_dir)");
}

RunConfig resolve(const Common& c) {
  if (!fs::exists(c.config)) throw LoadError("config file " + c.config + " not found");
  RunConfig cfg = load_config(c.config);
  for (const auto& kv : c.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
    set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.train.validate();
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (cfg.data_dir.empty()) throw ArgumentError("config has no data_dir");
  return cfg;
}

struct Loaded {
  Graph raw;
  Graph graph;
};

Loaded load(const RunConfig& cfg) {
  Graph raw = load_dataset(cfg.data_dir);
  Graph g = prepare_graph(raw, cfg);
  return {std::move(raw), std::move(g)};
}

BasicViews clean_views(const Graph& g, const RunConfig& cfg, std::uint64_t seed) {
  ViewSources src = view_sources(g, cfg);
  return build_basic_views(g.n_nodes(), cfg, src, src, seed);
}

nlohmann::ordered_json metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["f1_macro"] = m.f1_macro;
  j["f1_micro"] = m.f1_micro;
  j["auc"] = m.auc;
  j["accuracy"] = m.accuracy;
  return j;
}

void print_summary(const std::string& label, const std::vector<MetricsReport>& runs) {
  std::vector<double> ma, mi, auc, acc;
  for (const auto& r : runs) {
    ma.push_back(100 * r.f1_macro);
    mi.push_back(100 * r.f1_micro);
    auc.push_back(100 * r.auc);
    acc.push_back(100 * r.accuracy);
  }
  auto f = [](const std::vector<double>& v) {
    Summary s = summarize(v);
    return fmt::format("{:.2f}±{:.2f}", s.mean, s.std);
  };
  std::cout << fmt::format("{} over {} seeds: F1-macro {}  F1-micro {}  AUC {}  acc {}\n", label, runs.size(), f(ma),
                           f(mi), f(auc), f(acc));
}

std::unique_ptr<Trainer> make_trainer(const Graph& g, const BasicViews& v, const RunConfig& cfg, std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  return std::make_unique<Trainer>(g, v.v1, v.s1, v.v2, v.s2, tc);
}

int cmd_train(const Common& c, bool baseline) {
  RunConfig cfg = resolve(c);
  auto seeds = parse_seed_list(c.seeds);
  Loaded data = load(cfg);
  fs::create_directories(cfg.output_dir);
  std::vector<MetricsReport> runs, base_runs;
  nlohmann::ordered_json report;
  report["config"] = nlohmann::json::parse(to_json(cfg));
  for (std::uint64_t seed : seeds) {
    BasicViews views = clean_views(data.graph, cfg, seed);
    auto trainer = make_trainer(data.graph, views, cfg, seed);
    std::ofstream log(cfg.output_dir / fmt::format("metrics_seed{}.jsonl", seed));
    trainer->train(&log);
    save_checkpoint(trainer->state().best, cfg.output_dir / fmt::format("checkpoint_seed{}.bin", seed));
    MetricsReport test = trainer->evaluate(Split::test);
    runs.push_back(test);
    nlohmann::ordered_json row = metrics_json(test);
    row["seed"] = seed;
    row["best_iteration"] = trainer->state().best_iteration;
    std::cout << fmt::format("seed {:>3}  F1-macro {:.2f}  F1-micro {:.2f}  AUC {:.2f}  (best iteration {})\n", seed,
                             100 * test.f1_macro, 100 * test.f1_micro, 100 * test.auc,
                             trainer->state().best_iteration);
    if (baseline) {
      MetricsReport b = run_baseline(data.graph, views.v1, cfg, seed);
      base_runs.push_back(b);
      row["gcn"] = metrics_json(b);
      std::cout << fmt::format("          gcn F1-macro {:.2f}  F1-micro {:.2f}  AUC {:.2f}\n", 100 * b.f1_macro,
                               100 * b.f1_micro, 100 * b.auc);
    }
    report["runs"].push_back(row);
  }
  print_summary("cogsl", runs);
  if (baseline) print_summary("gcn  ", base_runs);
  std::ofstream(cfg.output_dir / "report.json") << report.dump(2) << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& split_name) {
  RunConfig cfg = resolve(c);
  Split split = split_name == "train" ? Split::train : split_name == "val" ? Split::val : Split::test;
  if (split_name != "train" && split_name != "val" && split_name != "test")
    throw ArgumentError("split must be train, val or test");
  auto seed = parse_seed_list(c.seeds).front();
  Loaded data = load(cfg);
  auto trainer = make_trainer(data.graph, clean_views(data.graph, cfg, seed), cfg, seed);
  trainer->state().best = load_checkpoint(checkpoint);
  MetricsReport m = trainer->evaluate(split);
  std::cout << metrics_json(m).dump() << '\n';
  return 0;
}

int cmd_attack(const Common& c, const std::string& kind, const std::vector<double>& rates, bool any_rate, bool clean,
               std::size_t threads) {
  RunConfig cfg = resolve(c);
  std::vector<AttackSpec> grid;
  for (double r : rates) {
    AttackSpec a;
    a.kind = parse_attack_kind(kind);
    a.rate = r;
    a.target = a.kind == AttackKind::feature_noise ? AttackTarget::features : AttackTarget::both;
    a.allow_any_rate = any_rate;
    a.validate();
    grid.push_back(a);
  }
  DefenseOptions opts;
  opts.seeds = parse_seed_list(c.seeds);
  opts.include_clean = clean;
  opts.threads = threads;
  Graph raw = load_dataset(cfg.data_dir);
  auto rows = run_defense_suite(raw, cfg, grid, opts);
  fs::create_directories(cfg.output_dir);
  std::ofstream csv(cfg.output_dir / fmt::format("attack_{}.csv", kind));
  write_defense_csv(csv, rows);
  write_defense_summary(std::cout, rows);
  return 0;
}

int cmd_sweep(const Common& c, const std::string& param, const std::vector<std::string>& values) {
  static const std::map<std::string, std::string> keys{{"eta", "eta"},         {"h", "scope_h"},
                                                       {"k", "scope_k"},       {"lambda", "lambda"},
                                                       {"epsilon", "epsilon"}, {"mu", "mu"},
                                                       {"tau", "tau"}};
  auto it = keys.find(param);
  if (it == keys.end()) throw ArgumentError("unknown sweep parameter '" + param + "' (eta, h, k, lambda, epsilon, mu, tau)");
  RunConfig base = resolve(c);
  auto seeds = parse_seed_list(c.seeds);
  Loaded data = load(base);
  fs::create_directories(base.output_dir);
  std::ofstream csv(base.output_dir / fmt::format("sweep_{}.csv", param));
  csv << "param,value,seed,f1_macro,f1_micro,auc,accuracy\n";
  for (const auto& v : values) {
    RunConfig cfg = base;
    set_option(cfg, it->second, v);
    cfg.train.validate();
    std::vector<MetricsReport> runs;
    for (std::uint64_t seed : seeds) {
      MetricsReport m = run_cogsl(data.graph, clean_views(data.graph, cfg, seed), cfg, seed).test;
      runs.push_back(m);
      csv << fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", param, v, seed, m.f1_macro, m.f1_micro, m.auc,
                         m.accuracy);
    }
    print_summary(fmt::format("{}={}", param, v), runs);
  }
  return 0;
}

int cmd_views(const Common& c, const std::string& checkpoint) {
  RunConfig cfg = resolve(c);
  auto seed = parse_seed_list(c.seeds).front();
  Loaded data = load(cfg);
  BasicViews v = clean_views(data.graph, cfg, seed);
  fs::create_directories(cfg.output_dir);
  auto dump = [&](const std::string& name, const View& view) {
    std::ofstream out(cfg.output_dir / name);
    write_view(out, view);
    std::cout << fmt::format("{}: {} nodes, {} entries\n", name, view.n(), view.weights.nnz());
  };
  dump(fmt::format("view1_{}.txt", to_string(cfg.views[0])), v.v1);
  dump(fmt::format("view2_{}.txt", to_string(cfg.views[1])), v.v2);
  if (!checkpoint.empty()) {
    auto trainer = make_trainer(data.graph, v, cfg, seed);
    ViewValues est = trainer->compute_views(load_checkpoint(checkpoint));
    dump("view1_estimated.txt", View{est.v1es, ViewKind::estimated});
    dump("view2_estimated.txt", View{est.v2es, ViewKind::estimated});
    dump("view_final.txt", View{est.vstar, ViewKind::fused});
  }
  return 0;
}

int cmd_fuse(const Common& c, const std::string& checkpoint, const std::string& beta_path) {
  RunConfig cfg = resolve(c);
  auto seed = parse_seed_list(c.seeds).front();
  Loaded data = load(cfg);
  auto trainer = make_trainer(data.graph, clean_views(data.graph, cfg, seed), cfg, seed);
  ParamSet params;
  if (checkpoint.empty()) {
    trainer->train();
    params = trainer->state().best;
  } else {
    params = load_checkpoint(checkpoint);
  }
  ViewValues v = trainer->compute_views(params);
  std::ofstream out(beta_path);
  if (!out) throw LoadError("cannot write " + beta_path);
  out << "node,beta1,beta2\n";
  for (std::size_t i = 0; i < v.beta1.rows(); ++i) out << fmt::format("{},{:.17g},{:.17g}\n", i, v.beta1[i], v.beta2[i]);
  std::vector<double> b(v.beta1.data().begin(), v.beta1.data().end());
  Summary s = summarize(b);
  std::cout << fmt::format("beta1 mean {:.4f} std {:.4f} over {} nodes -> {}\n", s.mean, s.std, b.size(), beta_path);
  return 0;
}

int cmd_mi(const Common& c, bool report) {
  RunConfig cfg = resolve(c);
  auto seed = parse_seed_list(c.seeds).front();
  Loaded data = load(cfg);
  auto trainer = make_trainer(data.graph, clean_views(data.graph, cfg, seed), cfg, seed);
  fs::create_directories(cfg.output_dir);
  std::ofstream log(cfg.output_dir / fmt::format("metrics_seed{}.jsonl", seed));
  if (report) std::cout << "iteration,mi_star_v1,mi_star_v2,mi_v1_v2\n";
  while (trainer->state().iteration < cfg.train.T) {
    std::string line = trainer->iterate();
    log << line << '\n';
    if (report) {
      auto j = nlohmann::json::parse(line);
      std::cout << fmt::format("{},{:.6f},{:.6f},{:.6f}\n", j["iteration"].get<std::size_t>(),
                               j["mi_star_v1"].get<double>(), j["mi_star_v2"].get<double>(),
                               j["mi_v1_v2"].get<double>());
    }
  }
  return 0;
}

int cmd_gradcheck(bool corrupt, double tol) {
  auto cases = gradcheck::registry();
  if (corrupt && !cases.empty()) cases.front().corrupt = 1.0;
  bool ok = true;
  double worst = 0.0;
  for (const auto& r : gradcheck::run(cases, 1e-5, tol)) {
    std::cout << fmt::format("{:<26} {:>5} entries  rel err {:.3e}  {}\n", r.name, r.n_entries, r.rel_error,
                             r.pass ? "ok" : "FAIL");
    ok = ok && r.pass;
    worst = std::max(worst, r.rel_error);
  }
  std::cout << fmt::format("{} ops, max rel err {:.3e}: {}\n", cases.size(), worst, ok ? "PASS" : "FAIL");
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogsl: graph structure learning with view estimation and fusion"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  Common common;
  bool baseline = false;
  auto* train = app.add_subcommand("train", "train over one or more seeds");
  add_common(train, common);
  train->add_flag("--baseline", baseline, "also train the plain GCN on the first view");

  std::string checkpoint, split = "test";
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--split", split);

  std::string attack_kind = "edge_delete";
  std::vector<double> rates;
  bool any_rate = false, with_clean = false;
  std::size_t threads = 0;
  auto* attack = app.add_subcommand("attack", "poisoning attack suite");
  add_common(attack, common);
  attack->add_option("--attack", attack_kind, "edge_delete, edge_add or feature_noise");
  attack->add_option("--rates", rates)->required();
  attack->add_flag("--allow-any-rate", any_rate);
  attack->add_flag("--clean", with_clean, "also train on the unattacked data");
  attack->add_option("--threads", threads, "workers (default COGSL_THREADS or all cores)");

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "grid over one hyper-parameter");
  add_common(sweep, common);
  sweep->add_option("--param", param)->required();
  sweep->add_option("--values", values)->required();

  auto* views = app.add_subcommand("views", "construct and dump the basic (and estimated) views");
  add_common(views, common);
  views->add_option("--checkpoint", checkpoint);

  std::string beta_path = "beta.csv";
  auto* fuse = app.add_subcommand("fuse", "per-node fusion weights");
  add_common(fuse, common);
  fuse->add_option("--checkpoint", checkpoint);
  fuse->add_option("--dump-beta", beta_path);

  bool mi_report = false;
  auto* mi = app.add_subcommand("mi", "train and report the pairwise MI losses");
  add_common(mi, common);
  mi->add_flag("--report", mi_report);

  bool corrupt = false;
  double tol = 1e-4;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every op");
  grad->add_flag("--corrupt", corrupt, "perturb one analytic gradient (self-test)");
  grad->add_option("--tol", tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  if (std::getenv("COGSL_THREADS")) kernels::set_num_threads(static_cast<int>(worker_threads()));

  try {
    if (*train) return cmd_train(common, baseline);
    if (*eval) return cmd_eval(common, checkpoint, split);
    if (*attack) return cmd_attack(common, attack_kind, rates, any_rate, with_clean, threads);
    if (*sweep) return cmd_sweep(common, param, values);
    if (*views) return cmd_views(common, checkpoint);
    if (*fuse) return cmd_fuse(common, checkpoint, beta_path);
    if (*mi) return cmd_mi(common, mi_report);
    if (*grad) return cmd_gradcheck(corrupt, tol);
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
