#include "cogsl/robustness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "cogsl/error.hpp"

namespace cogsl {

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "none") return AttackKind::none;
  if (name == "edge_delete" || name == "delete") return AttackKind::edge_delete;
  if (name == "edge_add" || name == "add") return AttackKind::edge_add;
  if (name == "feature_noise" || name == "noise") return AttackKind::feature_noise;
  throw ArgumentError("unknown attack '" + std::string(name) + "'");
}

const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::edge_delete: return "edge_delete";
    case AttackKind::edge_add: return "edge_add";
    case AttackKind::feature_noise: return "feature_noise";
  }
  return "?";
}

AttackTarget parse_attack_target(std::string_view name) {
  if (name == "view1") return AttackTarget::view1;
  if (name == "view2") return AttackTarget::view2;
  if (name == "both" || name == "all") return AttackTarget::both;
  if (name == "features") return AttackTarget::features;
  throw ArgumentError("unknown attack target '" + std::string(name) + "'");
}

const char* to_string(AttackTarget t) {
  switch (t) {
    case AttackTarget::view1: return "view1";
    case AttackTarget::view2: return "view2";
    case AttackTarget::both: return "both";
    case AttackTarget::features: return "features";
  }
  return "?";
}

void AttackSpec::validate() const {
  if (rate < 0.0) throw ArgumentError("attack rate must be >= 0");
  if (kind == AttackKind::edge_delete && rate >= 1.0) throw ArgumentError("deletion rate must be < 1");
  if (allow_any_rate || kind == AttackKind::none) return;
  auto in = [&](std::initializer_list<double> grid) {
    return std::any_of(grid.begin(), grid.end(), [&](double g) { return std::abs(g - rate) < 1e-12; });
  };
  bool ok = true;
  if (kind == AttackKind::edge_delete) ok = in({0.05, 0.10, 0.15});
  if (kind == AttackKind::edge_add) ok = in({0.25, 0.50, 0.75});
  if (kind == AttackKind::feature_noise) ok = in({0.1, 0.3, 0.5});
  if (!ok) {
    throw ArgumentError(fmt::format("rate {} is outside the {} grid (pass the override flag to allow it)", rate,
                                    to_string(kind)));
  }
}

std::size_t perturbation_count(double rate, std::size_t m) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(m) + 1e-9));
}

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

std::vector<Edge> canonical(std::vector<Edge> edges) {
  for (auto& [a, b] : edges)
    if (a > b) std::swap(a, b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

std::size_t count_components(std::size_t n, const std::vector<Edge>& edges) {
  DisjointSet ds(n);
  std::size_t comps = n;
  for (const auto& [a, b] : edges) comps -= ds.unite(a, b);
  return comps;
}

std::vector<Edge> delete_edges(std::size_t n, const std::vector<Edge>& edges_in, double rate, std::uint64_t seed) {
  std::vector<Edge> edges = canonical(edges_in);
  const std::size_t count = perturbation_count(rate, edges.size());
  if (count == 0) return edges;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  DisjointSet ds(n);
  std::vector<std::size_t> removable;
  for (std::size_t e : order)
    if (!ds.unite(edges[e].first, edges[e].second)) removable.push_back(e);
  if (count > removable.size()) {
    throw ArgumentError(fmt::format("cannot delete {} edges without disconnecting the graph ({} non-forest edges); "
                                    "use a lower rate",
                                    count, removable.size()));
  }
  std::sort(removable.begin(), removable.end());
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, removable.size() - 1);
    std::swap(removable[i], removable[pick(rng)]);
  }
  std::vector<char> drop(edges.size(), 0);
  for (std::size_t i = 0; i < count; ++i) drop[removable[i]] = 1;
  std::vector<Edge> out;
  out.reserve(edges.size() - count);
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (!drop[e]) out.push_back(edges[e]);
  return out;
}

std::vector<Edge> add_edges(std::size_t n, const std::vector<Edge>& edges_in, double rate, std::uint64_t seed) {
  std::vector<Edge> edges = canonical(edges_in);
  const std::size_t count = perturbation_count(rate, edges.size());
  if (count == 0) return edges;
  const std::size_t max_pairs = n * (n - 1) / 2;
  if (edges.size() + count > max_pairs)
    throw ArgumentError(fmt::format("cannot add {} edges: only {} free pairs", count, max_pairs - edges.size()));
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(2 * (edges.size() + count));
  for (const auto& [a, b] : edges) taken.insert(static_cast<std::uint64_t>(a) * n + b);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::size_t added = 0;
  while (added < count) {
    std::size_t a = node(rng), b = node(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!taken.insert(static_cast<std::uint64_t>(a) * n + b).second) continue;
    edges.emplace_back(static_cast<Index>(a), static_cast<Index>(b));
    ++added;
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

Graph attack_delete_edges(const Graph& graph, double rate, std::uint64_t seed) {
  return graph.with_edges(delete_edges(graph.n_nodes(), graph.edges(), rate, seed));
}

Graph attack_add_edges(const Graph& graph, double rate, std::uint64_t seed) {
  return graph.with_edges(add_edges(graph.n_nodes(), graph.edges(), rate, seed));
}

Tensor attack_features(const Tensor& x, double aleph, std::uint64_t seed) {
  if (aleph == 0.0 || x.rows() == 0 || x.cols() == 0) return x;
  double r = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    r += *std::max_element(row.begin(), row.end());
  }
  r /= static_cast<double>(x.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor out = x;
  for (double& v : out.data()) v += aleph * r * gauss(rng);
  return out;
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("COGSL_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Job {
  std::size_t point;
  AttackTarget target;
  std::string model;
  std::uint64_t seed;
};

std::uint64_t attack_seed(const AttackSpec& a, std::uint64_t run_seed) { return a.seed * 1000003ULL + run_seed; }

DefenseRow run_job(const Graph& raw, const RunConfig& cfg, const AttackSpec& a, const Job& job) {
  const Graph base = normalize_graph_features(raw, cfg);
  Graph g = ensure_edges(base, cfg);
  ViewSources clean = view_sources(g, cfg);
  ViewSources src1 = clean, src2 = clean;
  const std::uint64_t as = attack_seed(a, job.seed);

  if (a.kind == AttackKind::feature_noise) {
    Graph noisy = base.with_features(attack_features(base.features(), a.rate, as));
    if (raw.n_edges() == 0) noisy = ensure_edges(noisy.with_edges({}), cfg);
    g = noisy;
    src1 = src2 = view_sources(g, cfg);
  } else if (a.kind != AttackKind::none) {
    auto poison = [&](ViewSources& s, BasicView kind) {
      auto& e = s.for_view(kind);
      e = a.kind == AttackKind::edge_delete ? delete_edges(g.n_nodes(), e, a.rate, as)
                                            : add_edges(g.n_nodes(), e, a.rate, as);
    };
    if (job.target == AttackTarget::view1 || job.target == AttackTarget::both) poison(src1, cfg.views[0]);
    if (job.target == AttackTarget::view2 || job.target == AttackTarget::both) poison(src2, cfg.views[1]);
  }

  DefenseRow row{cfg.dataset, a.kind, a.rate, job.target, job.model, job.seed, {}};
  if (job.model == "gcn") {
    View v1 = build_view(g.n_nodes(), cfg.views[0], src1.for_view(cfg.views[0]), cfg.view, job.seed);
    row.metrics = run_baseline(g, v1, cfg, job.seed);
  } else {
    BasicViews views = build_basic_views(g.n_nodes(), cfg, src1, src2, job.seed);
    row.metrics = run_cogsl(g, views, cfg, job.seed).test;
  }
  return row;
}

}  // namespace

std::vector<DefenseRow> run_defense_suite(const Graph& raw, const RunConfig& cfg, const std::vector<AttackSpec>& grid,
                                          const DefenseOptions& opts) {
  std::vector<AttackSpec> points;
  if (opts.include_clean && !grid.empty()) points.push_back(AttackSpec{});
  for (const auto& a : grid) {
    a.validate();
    points.push_back(a);
  }
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<std::pair<AttackTarget, std::string>> models;
    if (points[p].kind == AttackKind::edge_delete || points[p].kind == AttackKind::edge_add)
      models = {{AttackTarget::view1, "cogsl_view1"},
                {AttackTarget::view2, "cogsl_view2"},
                {AttackTarget::both, "cogsl_all"},
                {AttackTarget::view1, "gcn"}};
    else {
      AttackTarget t = points[p].kind == AttackKind::feature_noise ? AttackTarget::features : AttackTarget::both;
      models = {{t, "cogsl_all"}, {t, "gcn"}};
    }
    for (const auto& [target, model] : models) {
      if (!opts.models.empty() && std::find(opts.models.begin(), opts.models.end(), model) == opts.models.end())
        continue;
      for (std::uint64_t s : opts.seeds) jobs.push_back(Job{p, target, model, s});
    }
  }

  std::vector<DefenseRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        rows[j] = run_job(raw, cfg, points[jobs[j].point], jobs[j]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const std::size_t n_threads = std::min(opts.threads ? opts.threads : worker_threads(), std::max<std::size_t>(jobs.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_defense_csv(std::ostream& out, const std::vector<DefenseRow>& rows) {
  out << "dataset,attack,rate,target,model,seed,f1_macro,f1_micro,auc,accuracy\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.dataset, to_string(r.attack), r.rate,
                       to_string(r.target), r.model, r.seed, r.metrics.f1_macro, r.metrics.f1_micro, r.metrics.auc,
                       r.metrics.accuracy);
  }
}

void write_defense_summary(std::ostream& out, const std::vector<DefenseRow>& rows) {
  struct Acc {
    std::vector<double> v;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> groups;
  for (const auto& r : rows) {
    std::string key = fmt::format("{:<14} {:>5} {:<9} {:<12}", to_string(r.attack), r.rate, to_string(r.target), r.model);
    if (!groups.count(key)) order.push_back(key);
    groups[key].v.push_back(r.metrics.accuracy * 100.0);
  }
  out << fmt::format("{:<14} {:>5} {:<9} {:<12} {:>8} {:>6} {:>3}\n", "attack", "rate", "target", "model", "acc",
                     "std", "n");
  for (const auto& key : order) {
    const auto& v = groups[key].v;
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    out << fmt::format("{} {:>8.2f} {:>6.2f} {:>3}\n", key, mean, std::sqrt(var / v.size()), v.size());
  }
}

}  // namespace cogsl
