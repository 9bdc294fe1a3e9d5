#include "cogsl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cogsl/error.hpp"

namespace cogsl {

void TrainConfig::validate() const {
  if (T == 0 || rho_theta == 0 || rho_phi == 0 || rho_omega == 0)
    throw ArgumentError("iteration counts must be >= 1");
  if (eta < 0.0) throw ArgumentError("eta must be >= 0");
  for (const auto* e : {&est1, &est2})
    if (!(e->mu > 0.0 && e->mu <= 1.0)) throw ArgumentError("mu must lie in (0, 1]");
  if (!(fusion.epsilon > 0.0)) throw ArgumentError("epsilon must be > 0");
  if (fusion.lambda < 0.0 || fusion.lambda > 1.0) throw ArgumentError("lambda must lie in [0, 1]");
  if (!(mi.tau > 0.0)) throw ArgumentError("tau must be > 0");
  if (lr_theta <= 0.0 || lr_phi <= 0.0 || lr_omega <= 0.0) throw ArgumentError("learning rates must be > 0");
}

nd::Var loss_cls(nd::Var o1, nd::Var o2, nd::Var ostar, std::span<const int> labels,
                 std::span<const std::size_t> train_idx) {
  if (train_idx.empty()) throw ArgumentError("loss_cls: empty train set");
  return nd::add(nd::add(nd::cross_entropy(o1, labels, train_idx), nd::cross_entropy(o2, labels, train_idx)),
                 nd::cross_entropy(ostar, labels, train_idx));
}

namespace {

CsrMatrix feature_matrix(const Graph& g) { return CsrMatrix::from_dense(g.features(), 0.0); }

double frobenius(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

void mean_std(const Tensor& t, double& mean, double& sd) {
  mean = 0.0;
  for (double v : t.data()) mean += v;
  mean /= static_cast<double>(t.size());
  double var = 0.0;
  for (double v : t.data()) var += (v - mean) * (v - mean);
  sd = std::sqrt(var / static_cast<double>(t.size()));
}

}  // namespace

Trainer::Trainer(const Graph& graph, View view1, const ScopeSet& scope1, View view2, const ScopeSet& scope2,
                 TrainConfig cfg)
    : cfg_(std::move(cfg)),
      x_(feature_matrix(graph)),
      n_(graph.n_nodes()),
      train_(graph.labeled(Split::train)),
      val_(graph.labeled(Split::val)),
      test_(graph.labeled(Split::test)),
      n_classes_(graph.n_classes()),
      est1_(std::move(view1), scope1, cfg_.est1),
      est2_(std::move(view2), scope2, cfg_.est2),
      rng_(cfg_.seed) {
  cfg_.validate();
  if (est1_.basic().n() != n_ || est2_.basic().n() != n_) throw ArgumentError("view size does not match graph");
  fused_support_ = pattern_union(*est1_.support(), *est2_.support());

  std::mt19937_64 init(cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
  auto next = [&] { return init(); };
  const std::size_t d = x_.cols();
  estimator::init_params(state_.params, cfg_.est1, d, cfg_.d_es, next());
  estimator::init_params(state_.params, cfg_.est2, d, cfg_.d_es, next());
  for (const auto& p : {kClassifier1, kClassifier2, kClassifierStar})
    fusion::init_classifier(state_.params, classifier(p), d, n_classes_, next());
  mi::init_params(state_.params, cfg_.mi, d, next());
  if (cfg_.fusion.variant == fusion::Variant::attention)
    state_.params.add(fusion::kAttentionLogits, Tensor(1, 2, 0.0), Group::theta);
  state_.best = state_.params;
}

fusion::ClassifierParams Trainer::classifier(const std::string& prefix) const {
  fusion::ClassifierParams c = cfg_.classifier;
  c.prefix = prefix;
  return c;
}

void Trainer::check_finite(double loss, const char* step) const {
  if (std::isfinite(loss)) return;
  std::ostringstream msg;
  msg << step << " loss is not finite at iteration " << state_.iteration << "; parameter norms:";
  for (const auto& [name, e] : state_.params.entries()) msg << ' ' << name << '=' << frobenius(e.value);
  spdlog::error("{}", msg.str());
  throw NumericalError(msg.str());
}

std::pair<nd::Var, nd::Var> Trainer::fusion_weights(nd::Tape& tape, const ParamSet& params, nd::Var o1,
                                                    nd::Var o2, bool trainable) const {
  switch (cfg_.fusion.variant) {
    case fusion::Variant::average: return fusion::average_weights(tape, n_);
    case fusion::Variant::attention: return fusion::attention_weights(tape, n_, params, trainable);
    case fusion::Variant::adaptive: break;
  }
  return fusion::fuse_weights(fusion::confidence(o1, cfg_.fusion), fusion::confidence(o2, cfg_.fusion));
}

ViewValues Trainer::compute_views(const ParamSet& params) const {
  nd::Tape tape;
  auto v1 = est1_.estimate(tape, x_, params, false);
  auto v2 = est2_.estimate(tape, x_, params, false);
  auto o1 = fusion::predict(v1, x_, params, classifier(kClassifier1), false);
  auto o2 = fusion::predict(v2, x_, params, classifier(kClassifier2), false);
  auto [b1, b2] = fusion_weights(tape, params, o1, o2, false);
  auto vstar = fusion::fuse_views(v1, v2, b1, b2, fused_support_);
  return ViewValues{v1.value(), v2.value(), vstar.value(), b1.value(), b2.value()};
}

Tensor Trainer::predict_star(const ParamSet& params) const {
  ViewValues v = compute_views(params);
  nd::Tape tape;
  return fusion::predict(tape.constant(v.vstar), x_, params, classifier(kClassifierStar), false).value();
}

void Trainer::step_omega() {
  nd::Tape tape;
  const ParamSet& p = state_.params;
  auto v1 = est1_.estimate(tape, x_, p, true, &rng_);
  auto v2 = est2_.estimate(tape, x_, p, true, &rng_);
  auto o1 = fusion::predict(v1, x_, p, classifier(kClassifier1), false);
  auto o2 = fusion::predict(v2, x_, p, classifier(kClassifier2), false);
  auto [b1, b2] = fusion_weights(tape, p, o1, o2, false);
  auto vstar = fusion::fuse_views(v1, v2, b1, b2, fused_support_);
  auto ostar = fusion::predict(vstar, x_, p, classifier(kClassifierStar), false);
  nd::Var loss = loss_cls(o1, o2, ostar, train_.labels, train_.nodes);
  state_.last_cls = loss.value().item();
  if (cfg_.eta > 0.0) {
    auto batch = mi::sample_batch(n_, cfg_.mi.batch, rng_);
    auto l_mi = mi::mi_total(vstar, v1, v2, x_, p, cfg_.mi, batch, false);
    loss = nd::sub(loss, nd::scale(l_mi.total, cfg_.eta));
  }
  state_.last_objective = loss.value().item();
  check_finite(state_.last_objective, "omega");
  tape.backward(loss);
  adam_step(state_.params, tape.gradients(), state_.adam_omega, cfg_.lr_omega, Group::omega);
  ++state_.omega_steps;
}

void Trainer::step_theta() {
  ViewValues views = compute_views(state_.params);
  nd::Tape tape;
  const ParamSet& p = state_.params;
  auto v1 = tape.constant(views.v1es);
  auto v2 = tape.constant(views.v2es);
  auto o1 = fusion::predict(v1, x_, p, classifier(kClassifier1), true, &rng_);
  auto o2 = fusion::predict(v2, x_, p, classifier(kClassifier2), true, &rng_);
  nd::SparseVar vstar;
  if (cfg_.fusion.variant == fusion::Variant::attention) {
    auto [b1, b2] = fusion::attention_weights(tape, n_, p, true);
    vstar = fusion::fuse_views(v1, v2, b1, b2, fused_support_);
  } else {
    vstar = tape.constant(views.vstar);
  }
  auto ostar = fusion::predict(vstar, x_, p, classifier(kClassifierStar), true, &rng_);
  nd::Var loss = loss_cls(o1, o2, ostar, train_.labels, train_.nodes);
  state_.last_cls = loss.value().item();
  check_finite(state_.last_cls, "theta");
  tape.backward(loss);
  adam_step(state_.params, tape.gradients(), state_.adam_theta, cfg_.lr_theta, Group::theta,
            cfg_.weight_decay_theta);
  state_.views = std::move(views);
  ++state_.theta_steps;
}

mi::MILosses Trainer::mi_report(nd::Tape& tape, const ParamSet& params, std::span<const std::size_t> batch) const {
  ViewValues views = compute_views(params);
  std::vector<std::size_t> all;
  if (batch.empty()) {
    all.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) all[i] = i;
    batch = all;
  }
  return mi::mi_total(tape.constant(views.vstar), tape.constant(views.v1es), tape.constant(views.v2es), x_,
                      params, cfg_.mi, batch, false);
}

void Trainer::phi_update(const ViewValues& views) {
  nd::Tape tape;
  auto batch = mi::sample_batch(n_, cfg_.mi.batch, rng_);
  auto l = mi::mi_total(tape.constant(views.vstar), tape.constant(views.v1es), tape.constant(views.v2es), x_,
                        state_.params, cfg_.mi, batch, true);
  state_.last_mi[0] = l.star_v1.value().item();
  state_.last_mi[1] = l.star_v2.value().item();
  state_.last_mi[2] = l.v1_v2.value().item();
  check_finite(l.total.value().item(), "phi");
  tape.backward(l.total);
  adam_step(state_.params, tape.gradients(), state_.adam_phi, cfg_.lr_phi, Group::phi);
  ++state_.phi_steps;
}

void Trainer::step_phi() { phi_update(compute_views(state_.params)); }

std::string Trainer::iterate() {
  for (std::size_t e = 0; e < cfg_.rho_omega; ++e) step_omega();
  for (std::size_t e = 0; e < cfg_.rho_theta; ++e) step_theta();
  // Views do not depend on Phi, so one forward serves every Phi epoch.
  const ViewValues views = compute_views(state_.params);
  for (std::size_t e = 0; e < cfg_.rho_phi; ++e) phi_update(views);
  ++state_.iteration;

  state_.views = compute_views(state_.params);
  nd::Tape tape;
  Tensor probs = fusion::predict(tape.constant(state_.views.vstar), x_, state_.params,
                                 classifier(kClassifierStar), false)
                     .value();
  MetricsReport val = evaluate_predictions(probs, val_.nodes, val_.labels, n_classes_);
  double val_loss = 0.0;
  for (std::size_t k = 0; k < val_.nodes.size(); ++k)
    val_loss -= std::log(std::max(probs(val_.nodes[k], val_.labels[k]), 1e-12));
  // Ties on F1-micro are frequent with small validation sets; the lower
  // validation cross-entropy wins them.
  if (val.f1_micro > state_.best_val || (val.f1_micro == state_.best_val && val_loss < state_.best_val_loss)) {
    state_.best = state_.params;
    state_.best_val = val.f1_micro;
    state_.best_val_loss = val_loss;
    state_.best_iteration = state_.iteration;
  }
  double b_mean = 0.0, b_sd = 0.0;
  mean_std(state_.views.beta1, b_mean, b_sd);

  nlohmann::ordered_json j;
  j["iteration"] = state_.iteration;
  j["loss_cls"] = state_.last_cls;
  j["objective_omega"] = state_.last_objective;
  j["mi_star_v1"] = state_.last_mi[0];
  j["mi_star_v2"] = state_.last_mi[1];
  j["mi_v1_v2"] = state_.last_mi[2];
  j["val_f1_macro"] = val.f1_macro;
  j["val_f1_micro"] = val.f1_micro;
  j["val_auc"] = val.auc;
  j["val_loss"] = val_loss;
  j["beta1_mean"] = b_mean;
  j["beta1_std"] = b_sd;
  j["best_iteration"] = state_.best_iteration;
  return j.dump();
}

const TrainState& Trainer::train(std::ostream* log) {
  while (state_.iteration < cfg_.T) {
    std::string line = iterate();
    if (log) *log << line << '\n';
    if (cfg_.patience > 0 && state_.iteration - state_.best_iteration >= cfg_.patience) {
      state_.early_stopped = true;
      spdlog::debug("early stop at iteration {}", state_.iteration);
      break;
    }
  }
  return state_;
}

MetricsReport Trainer::evaluate(Split split, bool use_best) const {
  const LabeledSet& set = split == Split::train ? train_ : split == Split::val ? val_ : test_;
  if (set.nodes.empty()) throw ArgumentError(std::string("evaluate: split ") + to_string(split) + " is empty");
  Tensor probs = predict_star(use_best ? state_.best : state_.params);
  return evaluate_predictions(probs, set.nodes, set.labels, n_classes_);
}

MetricsReport train_gcn_baseline(const Graph& graph, const View& view, const BaselineConfig& cfg) {
  const CsrMatrix x = feature_matrix(graph);
  const LabeledSet train = graph.labeled(Split::train);
  const LabeledSet val = graph.labeled(Split::val);
  const LabeledSet test = graph.labeled(Split::test);

  ParamSet params;
  std::mt19937_64 init(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  init();
  init();
  fusion::init_classifier(params, cfg.classifier, x.cols(), graph.n_classes(), init());
  ParamSet best = params;
  double best_val = -1.0;
  double best_loss = 0.0;
  std::size_t best_epoch = 0;
  AdamState adam;
  std::mt19937_64 rng(cfg.seed);

  auto eval_probs = [&](const ParamSet& p) {
    nd::Tape tape;
    return fusion::predict(tape.constant(view.weights), x, p, cfg.classifier, false).value();
  };
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    nd::Tape tape;
    auto probs = fusion::predict(tape.constant(view.weights), x, params, cfg.classifier, true, &rng);
    auto loss = nd::cross_entropy(probs, train.labels, train.nodes);
    if (!std::isfinite(loss.value().item())) throw NumericalError("baseline loss is not finite");
    tape.backward(loss);
    adam_step(params, tape.gradients(), adam, cfg.lr, Group::theta, cfg.weight_decay);
    Tensor p = eval_probs(params);
    MetricsReport v = evaluate_predictions(p, val.nodes, val.labels, graph.n_classes());
    double v_loss = 0.0;
    for (std::size_t k = 0; k < val.nodes.size(); ++k) v_loss -= std::log(std::max(p(val.nodes[k], val.labels[k]), 1e-12));
    if (v.f1_micro > best_val || (v.f1_micro == best_val && v_loss < best_loss)) {
      best_val = v.f1_micro;
      best_loss = v_loss;
      best = params;
      best_epoch = epoch;
    }
    if (cfg.patience > 0 && epoch - best_epoch >= cfg.patience) break;
  }
  return evaluate_predictions(eval_probs(best), test.nodes, test.labels, graph.n_classes());
}

}  // namespace cogsl
