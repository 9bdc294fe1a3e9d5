#include "cogsl/estimator.hpp"

#include "cogsl/error.hpp"

namespace cogsl::estimator {

void init_params(ParamSet& params, const EstimatorParams& cfg, std::size_t d_in, std::size_t d_es,
                 std::uint64_t seed) {
  params.add(cfg.weight(), glorot_init(d_in, d_es, seed), Group::omega);
  params.add(cfg.pair_weight(), glorot_init(2 * d_es, 1, seed + 1), Group::omega);
  params.add(cfg.pair_bias(), Tensor(1, 1), Group::omega);
}

nd::Var embed(const nd::SparseVar& view, const CsrMatrix& x, nd::Var w, nd::Activation act) {
  return nd::activate(act, nd::gcn_layer(view, x, w));
}

nd::SparseVar pair_scores(nd::Var z, const PatternPtr& scope, nd::Var w_pair, nd::Var b) {
  const std::size_t d = z.cols();
  if (w_pair.rows() != 2 * d || w_pair.cols() != 1) {
    throw ArgumentError("pair_scores: w_pair must be (2 d_es) x 1");
  }
  nd::Var u = nd::matmul(z, nd::slice_rows(w_pair, 0, d));
  nd::Var v = nd::matmul(z, nd::slice_rows(w_pair, d, 2 * d));
  return nd::edge_scores(scope, u, v, b);
}

nd::SparseVar estimate_probabilities(const nd::SparseVar& scores) { return nd::sparse_row_softmax(scores); }

namespace {

void check_mu(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw ArgumentError("blend coefficient mu must lie in (0,1], got " + std::to_string(mu));
}

}  // namespace

nd::SparseVar blend(const CsrMatrix& base, const nd::SparseVar& p, double mu, const PatternPtr& support) {
  check_mu(mu);
  nd::Tape& tape = p.values.tape();
  nd::SparseVar b = tape.constant(base.embed_into(support));
  return nd::sparse_add(b, nd::sparse_scale(nd::sparse_embed(p, support), mu));
}

View blend(const View& base, const View& p, double mu) {
  check_mu(mu);
  if (base.n() != p.n()) throw ArgumentError("blend: view sizes differ");
  nd::Tape tape;
  auto support = pattern_union(*base.weights.pattern, *p.weights.pattern);
  auto out = blend(base.weights, tape.constant(p.weights), mu, support);
  return View{out.value(), ViewKind::estimated};
}

ViewEstimator::ViewEstimator(View basic, const ScopeSet& scope, EstimatorParams cfg)
    : basic_(std::move(basic)), cfg_(std::move(cfg)) {
  if (scope.size() != basic_.n()) throw ArgumentError("scope size differs from view size");
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (scope[i].empty()) throw ArgumentError("scope of node " + std::to_string(i) + " is empty");
  }
  if (!(cfg_.mu > 0.0 && cfg_.mu <= 1.0)) throw ArgumentError("mu must lie in (0,1]");
  scope_ = scope.pattern();
  support_ = pattern_union(*basic_.weights.pattern, *scope_);
  base_on_support_ = basic_.weights.embed_into(support_);
}

nd::SparseVar ViewEstimator::estimate(nd::Tape& tape, const CsrMatrix& x, const ParamSet& params,
                                      bool trainable, std::mt19937_64* rng) const {
  nd::Var w = params.bind(tape, cfg_.weight(), trainable);
  nd::Var w_pair = params.bind(tape, cfg_.pair_weight(), trainable);
  nd::Var b = params.bind(tape, cfg_.pair_bias(), trainable);
  nd::SparseVar view = tape.constant(basic_.weights);
  nd::Var z = embed(view, x, w, cfg_.activation);
  if (rng && cfg_.dropout > 0.0) z = nd::dropout(z, cfg_.dropout, *rng);
  nd::SparseVar p = estimate_probabilities(pair_scores(z, scope_, w_pair, b));
  nd::SparseVar base = tape.constant(base_on_support_);
  return nd::sparse_add(base, nd::sparse_scale(nd::sparse_embed(p, support_), cfg_.mu));
}

}  // namespace cogsl::estimator
