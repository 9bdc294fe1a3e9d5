#include "cogsl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "cogsl/estimator.hpp"
#include "cogsl/fusion.hpp"
#include "cogsl/mi.hpp"
#include "cogsl/ops.hpp"
#include "cogsl/trainer.hpp"
#include "cogsl/views.hpp"

namespace cogsl::gradcheck {

using nd::SparseVar;
using nd::Tape;
using nd::Var;
using Inputs = std::span<const Var>;

Result check(const Case& c, double h, double tol) {
  auto with_inputs = [&](const std::vector<Tensor>& in) {
    ParamSet p = *c.params;
    for (std::size_t k = 0; k < in.size(); ++k) p.value(c.param_names[k]) = in[k];
    return p;
  };
  std::vector<Tensor> analytic;
  if (c.param_fn) {
    Tape tape;
    Var loss = c.param_fn(tape, with_inputs(c.inputs), true);
    tape.backward(loss);
    const auto grads = tape.gradients();
    for (std::size_t k = 0; k < c.inputs.size(); ++k) {
      auto it = grads.find(c.param_names[k]);
      analytic.push_back(it != grads.end() ? it->second : Tensor(c.inputs[k].rows(), c.inputs[k].cols()));
    }
  } else {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& t : c.inputs) vars.push_back(tape.leaf(t));
    Var loss = c.fn(tape, vars);
    tape.backward(loss);
    for (const auto& v : vars) analytic.push_back(tape.grad(v));
  }
  if (!analytic.empty() && !analytic[0].empty()) analytic[0][0] += c.corrupt;

  auto eval = [&](const std::vector<Tensor>& in) {
    Tape tape;
    if (c.param_fn) return c.param_fn(tape, with_inputs(in), false).value().item();
    std::vector<Var> vars;
    for (const auto& t : in) vars.push_back(tape.constant(t));
    return c.fn(tape, vars).value().item();
  };
  std::vector<Tensor> probe = c.inputs;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  std::size_t entries = 0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t e = 0; e < probe[k].size(); ++e) {
      const double x0 = probe[k][e];
      probe[k][e] = x0 + h;
      const double up = eval(probe);
      probe[k][e] = x0 - h;
      const double down = eval(probe);
      probe[k][e] = x0;
      const double num = (up - down) / (2.0 * h);
      const double an = analytic[k][e];
      diff2 += (an - num) * (an - num);
      a2 += an * an;
      n2 += num * num;
      ++entries;
    }
  }
  Result r;
  r.name = c.name;
  r.n_entries = entries;
  r.rel_error = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-8});
  r.pass = r.rel_error < tol;
  return r;
}

std::vector<Result> run(const std::vector<Case>& cases, double h, double tol) {
  std::vector<Result> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(check(c, h, tol));
  return out;
}

namespace {

Tensor uniform(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(r, c);
  for (double& v : t.data()) v = u(rng);
  return t;
}

/// Projects an arbitrary output onto a fixed random direction.
Var project(Tape& tape, Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return nd::sum(nd::mul(y, tape.constant(uniform(y.rows(), y.cols(), rng))));
}

Var project(Tape& tape, const SparseVar& y, std::uint64_t seed) { return project(tape, y.values, seed); }

/// Random symmetric pattern on n nodes, each node with at least one neighbour.
PatternPtr ring_pattern(std::size_t n, bool diagonal) {
  std::vector<std::vector<Index>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].push_back(static_cast<Index>((i + 1) % n));
    rows[i].push_back(static_cast<Index>((i + n - 1) % n));
    if (i % 3 == 0) rows[i].push_back(static_cast<Index>((i + n / 2) % n));
    if (diagonal) rows[i].push_back(static_cast<Index>(i));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (i % 3 == 0) rows[(i + n / 2) % n].push_back(static_cast<Index>(i));
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return SparsePattern::from_rows(n, n, rows);
}

Graph small_graph(std::size_t n, std::size_t d, std::size_t classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor x = uniform(n, d, rng, 0.0, 1.0);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(static_cast<Index>(i), static_cast<Index>((i + 1) % n));
  edges.emplace_back(0, static_cast<Index>(n / 2));
  std::vector<std::size_t> train, val, test;
  for (std::size_t i = 0; i < n; ++i) (i < n / 2 ? train : i < 3 * n / 4 ? val : test).push_back(i);
  return Graph(std::move(x), std::move(labels), std::move(edges), {train, val, test});
}

}  // namespace

std::vector<Case> registry() {
  std::vector<Case> cases;
  std::mt19937_64 rng(20240601);
  auto add = [&](std::string name, std::vector<Tensor> in, auto fn) {
    Case c;
    c.name = std::move(name);
    c.inputs = std::move(in);
    c.fn = fn;
    cases.push_back(std::move(c));
  };
  const auto a34 = [&] { return uniform(3, 4, rng); };

  add("add", {a34(), a34()}, [](Tape& t, Inputs v) { return project(t, nd::add(v[0], v[1]), 1); });
  add("sub", {a34(), a34()}, [](Tape& t, Inputs v) { return project(t, nd::sub(v[0], v[1]), 2); });
  add("mul", {a34(), a34()}, [](Tape& t, Inputs v) { return project(t, nd::mul(v[0], v[1]), 3); });
  add("div", {a34(), uniform(3, 4, rng, 0.5, 2.0)}, [](Tape& t, Inputs v) { return project(t, nd::div(v[0], v[1]), 4); });
  add("scale", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::scale(v[0], -1.7), 5); });
  add("add_row_bias", {a34(), uniform(1, 4, rng)},
      [](Tape& t, Inputs v) { return project(t, nd::add_row_bias(v[0], v[1]), 6); });
  add("sum", {a34()}, [](Tape&, Inputs v) { return nd::sum(v[0]); });
  add("matmul", {a34(), uniform(4, 2, rng)}, [](Tape& t, Inputs v) { return project(t, nd::matmul(v[0], v[1]), 7); });
  {
    CsrMatrix x = CsrMatrix::from_dense(uniform(5, 4, rng, -1.0, 1.0), 0.4);
    add("matmul_sparse_const", {uniform(4, 3, rng)},
        [x](Tape& t, Inputs v) { return project(t, nd::matmul(x, v[0]), 8); });
  }
  add("slice_rows", {uniform(5, 3, rng)}, [](Tape& t, Inputs v) { return project(t, nd::slice_rows(v[0], 1, 4), 9); });
  add("gather_rows", {uniform(5, 3, rng)}, [](Tape& t, Inputs v) {
    std::vector<std::size_t> rows{4, 0, 4, 2};
    return project(t, nd::gather_rows(v[0], rows), 10);
  });
  add("relu", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::relu(v[0]), 11); });
  add("prelu", {a34(), Tensor::scalar(0.25)}, [](Tape& t, Inputs v) { return project(t, nd::prelu(v[0], v[1]), 12); });
  add("elu", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::elu(v[0]), 13); });
  add("tanh", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::tanh(v[0]), 14); });
  add("sigmoid", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::sigmoid(v[0]), 15); });
  add("dropout", {a34()}, [](Tape& t, Inputs v) {
    std::mt19937_64 r(99);
    return project(t, nd::dropout(v[0], 0.4, r), 16);
  });
  add("row_softmax", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::row_softmax(v[0]), 17); });
  {
    ScopeSet scope{{{0, 2}, {1}, {0, 1, 3}}};
    add("masked_row_softmax", {a34()},
        [scope](Tape& t, Inputs v) { return project(t, nd::masked_row_softmax(v[0], scope), 18); });
  }
  add("cross_entropy", {a34()}, [](Tape&, Inputs v) {
    std::vector<int> labels{1, 3, 0};
    std::vector<std::size_t> nodes{0, 1, 2};
    return nd::cross_entropy(nd::row_softmax(v[0]), labels, nodes);
  });
  add("row_l2_normalize", {a34()}, [](Tape& t, Inputs v) { return project(t, nd::row_l2_normalize(v[0]), 19); });
  add("infonce_normalized", {uniform(6, 4, rng), uniform(6, 4, rng)}, [](Tape&, Inputs v) {
    return nd::infonce_normalized(nd::row_l2_normalize(v[0]), nd::row_l2_normalize(v[1]), 0.5);
  });
  add("confidence", {uniform(5, 3, rng, -2.0, 2.0)}, [](Tape& t, Inputs v) {
    return project(t, nd::confidence(nd::row_softmax(v[0]), 0.1, 0.5, 1e-8), 20);
  });

  const std::size_t n = 8;
  const PatternPtr pat = ring_pattern(n, false);
  const auto sp_values = [&] { return uniform(pat->nnz(), 1, rng, 0.2, 1.5); };
  add("gcn_normalize", {sp_values()},
      [pat](Tape& t, Inputs v) { return project(t, nd::gcn_normalize(SparseVar{pat, v[0]}, true), 21); });
  add("gcn_normalize_no_loops", {sp_values()},
      [pat](Tape& t, Inputs v) { return project(t, nd::gcn_normalize(SparseVar{pat, v[0]}, false), 22); });
  add("spmm", {sp_values(), uniform(n, 3, rng)},
      [pat](Tape& t, Inputs v) { return project(t, nd::spmm(SparseVar{pat, v[0]}, v[1]), 23); });
  add("gcn_layer", {sp_values(), uniform(n, 3, rng), uniform(3, 2, rng)}, [pat](Tape& t, Inputs v) {
    return project(t, nd::gcn_layer(SparseVar{pat, v[0]}, v[1], v[2]), 24);
  });
  {
    CsrMatrix x = CsrMatrix::from_dense(uniform(n, 5, rng, -1.0, 1.0), 0.3);
    add("gcn_layer_sparse_x", {sp_values(), uniform(5, 2, rng)}, [pat, x](Tape& t, Inputs v) {
      return project(t, nd::gcn_layer(SparseVar{pat, v[0]}, x, v[1]), 25);
    });
  }
  add("edge_scores", {uniform(n, 1, rng), uniform(n, 1, rng), Tensor::scalar(0.3)},
      [pat](Tape& t, Inputs v) { return project(t, nd::edge_scores(pat, v[0], v[1], v[2]), 26); });
  add("sparse_row_softmax", {uniform(pat->nnz(), 1, rng)},
      [pat](Tape& t, Inputs v) { return project(t, nd::sparse_row_softmax(SparseVar{pat, v[0]}), 27); });
  {
    PatternPtr big = with_diagonal(*pat);
    add("sparse_embed", {sp_values()},
        [pat, big](Tape& t, Inputs v) { return project(t, nd::sparse_embed(SparseVar{pat, v[0]}, big), 28); });
  }
  add("sparse_add", {sp_values(), sp_values()}, [pat](Tape& t, Inputs v) {
    return project(t, nd::sparse_add(SparseVar{pat, v[0]}, SparseVar{pat, v[1]}), 29);
  });
  add("sparse_scale", {sp_values()},
      [pat](Tape& t, Inputs v) { return project(t, nd::sparse_scale(SparseVar{pat, v[0]}, 0.7), 30); });
  add("sparse_row_scale", {sp_values(), uniform(n, 1, rng)}, [pat](Tape& t, Inputs v) {
    return project(t, nd::sparse_row_scale(SparseVar{pat, v[0]}, v[1]), 31);
  });
  add("gather_sparse", {uniform(n, n, rng)},
      [pat](Tape& t, Inputs v) { return project(t, nd::gather_sparse(v[0], pat), 32); });
  add("sparse_to_dense", {sp_values()},
      [pat](Tape& t, Inputs v) { return project(t, nd::sparse_to_dense(SparseVar{pat, v[0]}), 33); });

  // Module-level compositions on a 10-node graph.
  const std::size_t d = 5, classes = 3;
  const Graph g = small_graph(10, d, classes, 7);
  const CsrMatrix x = CsrMatrix::from_dense(g.features(), 0.0);
  const View va = adjacency_view(g, false);
  const View vs = ppr_diffusion(g, 0.15, PprMode::closed_form);
  const ScopeSet sa = scope_khop(va, 1);
  const ScopeSet ss = scope_toph(vs, 4);

  TrainConfig tc;
  tc.eta = 0.5;
  tc.mi.hidden = tc.mi.proj_hidden = 4;
  tc.d_es = 4;
  tc.classifier.hidden = 4;
  tc.classifier.dropout = 0.0;
  ParamSet params;
  estimator::init_params(params, tc.est1, d, tc.d_es, 1);
  estimator::init_params(params, tc.est2, d, tc.d_es, 2);
  for (const auto& p : {kClassifier1, kClassifier2, kClassifierStar}) {
    fusion::ClassifierParams cp = tc.classifier;
    cp.prefix = p;
    fusion::init_classifier(params, cp, d, classes, 3 + p.size());
  }
  mi::init_params(params, tc.mi, d, 11);
  auto ps = std::make_shared<const ParamSet>(params);
  auto cls = [tc](const std::string& prefix) {
    fusion::ClassifierParams c = tc.classifier;
    c.prefix = prefix;
    return c;
  };

  add("estimator_embed", {params.value(tc.est1.weight())}, [va, x](Tape& t, Inputs v) {
    return project(t, estimator::embed(t.constant(va.weights), x, v[0], nd::Activation::elu), 40);
  });
  {
    PatternPtr sp = sa.pattern();
    add("estimator_pair_scores", {uniform(10, 3, rng), uniform(6, 1, rng), Tensor::scalar(0.1)},
        [sp](Tape& t, Inputs v) { return project(t, estimator::pair_scores(v[0], sp, v[1], v[2]), 41); });
    PatternPtr support = pattern_union(*va.weights.pattern, *sp);
    add("estimator_blend", {uniform(sp->nnz(), 1, rng)}, [va, sp, support](Tape& t, Inputs v) {
      SparseVar p = estimator::estimate_probabilities(SparseVar{sp, v[0]});
      return project(t, estimator::blend(va.weights, p, 0.5, support), 42);
    });
  }
  add("fusion_predict_view", {uniform(va.weights.nnz(), 1, rng, 0.2, 1.5)}, [va, x, ps, cls](Tape& t, Inputs v) {
    return project(t, fusion::predict(SparseVar{va.weights.pattern, v[0]}, x, *ps, cls(kClassifier1), false), 43);
  });
  add("fusion_weights", {uniform(10, 3, rng, -2, 2), uniform(10, 3, rng, -2, 2)}, [](Tape& t, Inputs v) {
    fusion::FusionConfig fc;
    auto [b1, b2] = fusion::fuse_weights(fusion::confidence(nd::row_softmax(v[0]), fc),
                                         fusion::confidence(nd::row_softmax(v[1]), fc));
    return nd::add(project(t, b1, 44), project(t, b2, 45));
  });
  {
    PatternPtr support = pattern_union(*va.weights.pattern, *vs.weights.pattern);
    add("fusion_fuse_views",
        {uniform(va.weights.nnz(), 1, rng, 0.1, 1), uniform(vs.weights.nnz(), 1, rng, 0.1, 1), uniform(10, 1, rng, 0.1, 0.9)},
        [va, vs, support](Tape& t, Inputs v) {
          Var b2 = nd::sub(t.constant(Tensor(10, 1, 1.0)), v[2]);
          return project(t,
                         fusion::fuse_views(SparseVar{va.weights.pattern, v[0]}, SparseVar{vs.weights.pattern, v[1]},
                                            v[2], b2, support),
                         46);
        });
  }
  auto add_params = [&](std::string name, std::vector<std::string> names, std::shared_ptr<const ParamSet> base,
                        std::function<Var(Tape&, const ParamSet&, bool)> fn) {
    Case c;
    c.name = std::move(name);
    for (const auto& nm : names) c.inputs.push_back(base->value(nm));
    c.param_names = std::move(names);
    c.params = std::move(base);
    c.param_fn = std::move(fn);
    cases.push_back(std::move(c));
  };
  {
    auto gate = std::make_shared<ParamSet>();
    gate->add(fusion::kAttentionLogits, uniform(1, 2, rng), Group::theta);
    add_params("fusion_attention", {fusion::kAttentionLogits}, gate, [](Tape& t, const ParamSet& p, bool tr) {
      auto [a1, a2] = fusion::attention_weights(t, 4, p, tr);
      return nd::add(project(t, a1, 47), project(t, a2, 48));
    });
  }
  add_params("mi_embed", {mi::encoder_weight(mi::Which::v1), mi::encoder_slope(mi::Which::v1)}, ps,
             [va, x](Tape& t, const ParamSet& p, bool trn) {
               return project(t, mi::mi_embed(t.constant(va.weights), x, p, mi::Which::v1, trn), 49);
             });
  {
    Tensor h = uniform(10, 4, rng);
    add_params("mi_projection", {mi::kProjW0, mi::kProjB0, mi::kProjW1, mi::kProjB1}, ps,
               [h, tc](Tape& t, const ParamSet& p, bool trn) {
                 auto proj = mi::Projection::bind(t, p, tc.mi, trn);
                 return project(t, proj(t.constant(h)), 50);
               });
  }
  add("mi_infonce", {uniform(10, 4, rng), uniform(10, 4, rng)}, [](Tape&, Inputs v) {
    std::vector<std::size_t> batch{0, 2, 3, 5, 9};
    return mi::infonce(v[0], v[1], batch, 0.5);
  });
  add("loss_cls", {uniform(10, 3, rng), uniform(10, 3, rng), uniform(10, 3, rng)}, [g](Tape&, Inputs v) {
    LabeledSet tr = g.labeled(Split::train);
    return loss_cls(nd::row_softmax(v[0]), nd::row_softmax(v[1]), nd::row_softmax(v[2]), tr.labels, tr.nodes);
  });

  // Full Omega objective L_cls - eta L_MI with Theta and Phi held constant.
  ParamSet omega_params = params;
  omega_params.value(tc.est1.pair_bias()) = Tensor::scalar(0.2);
  omega_params.value(tc.est2.pair_bias()) = Tensor::scalar(-0.1);
  auto omega_base = std::make_shared<const ParamSet>(omega_params);
  std::vector<std::string> omega_names, theta_names, phi_names;
  for (const auto& [nm, e] : params.entries()) {
    if (e.group == Group::omega) omega_names.push_back(nm);
    if (e.group == Group::theta) theta_names.push_back(nm);
    if (e.group == Group::phi) phi_names.push_back(nm);
  }
  auto e1 = std::make_shared<estimator::ViewEstimator>(va, sa, tc.est1);
  auto e2 = std::make_shared<estimator::ViewEstimator>(vs, ss, tc.est2);
  auto support = pattern_union(*e1->support(), *e2->support());
  const LabeledSet tr = g.labeled(Split::train);
  const std::vector<std::size_t> batch{0, 1, 2, 4, 5, 7, 8, 9};

  add_params("omega_pipeline", omega_names, omega_base, [=](Tape& t, const ParamSet& p, bool trn) {
    SparseVar v1 = e1->estimate(t, x, p, trn);
    SparseVar v2 = e2->estimate(t, x, p, trn);
    Var o1 = fusion::predict(v1, x, p, cls(kClassifier1), false);
    Var o2 = fusion::predict(v2, x, p, cls(kClassifier2), false);
    auto [b1, b2] = fusion::fuse_weights(fusion::confidence(o1, tc.fusion), fusion::confidence(o2, tc.fusion));
    SparseVar vstar = fusion::fuse_views(v1, v2, b1, b2, support);
    Var ostar = fusion::predict(vstar, x, p, cls(kClassifierStar), false);
    Var l = loss_cls(o1, o2, ostar, tr.labels, tr.nodes);
    Var lmi = mi::mi_total(vstar, v1, v2, x, p, tc.mi, batch, false).total;
    return nd::sub(l, nd::scale(lmi, tc.eta));
  });

  // Theta objective on fixed views, including the classifier dropout path.
  const View v1_fixed = e1->basic();
  const View v2_fixed = e2->basic();
  const View vstar_fixed = fusion::fuse_variant_average(v1_fixed, v2_fixed);
  add_params("theta_loss_cls", theta_names, omega_base, [=](Tape& t, const ParamSet& p, bool trn) {
    std::mt19937_64 r(5);
    fusion::ClassifierParams c1 = cls(kClassifier1);
    c1.dropout = 0.3;
    Var o1 = fusion::predict(t.constant(v1_fixed.weights), x, p, c1, trn, &r);
    Var o2 = fusion::predict(t.constant(v2_fixed.weights), x, p, cls(kClassifier2), trn);
    Var os = fusion::predict(t.constant(vstar_fixed.weights), x, p, cls(kClassifierStar), trn);
    return loss_cls(o1, o2, os, tr.labels, tr.nodes);
  });

  // Phi objective on fixed views.
  add_params("phi_mi_total", phi_names, omega_base, [=](Tape& t, const ParamSet& p, bool trn) {
    return mi::mi_total(t.constant(vstar_fixed.weights), t.constant(v1_fixed.weights), t.constant(v2_fixed.weights),
                        x, p, tc.mi, batch, trn)
        .total;
  });
  return cases;
}

}  // namespace cogsl::gradcheck
