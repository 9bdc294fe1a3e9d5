#include "cogsl/fusion.hpp"

#include "cogsl/error.hpp"

namespace cogsl::fusion {

void init_classifier(ParamSet& params, const ClassifierParams& cfg, std::size_t d_in,
                     std::size_t n_classes, std::uint64_t seed) {
  params.add(cfg.w0(), glorot_init(d_in, cfg.hidden, seed), Group::theta);
  params.add(cfg.w1(), glorot_init(cfg.hidden, n_classes, seed + 1), Group::theta);
}

nd::Var predict(const nd::SparseVar& view, const CsrMatrix& x, const ParamSet& params,
                const ClassifierParams& cfg, bool trainable, std::mt19937_64* rng) {
  nd::Var w0 = params.bind(view.values.tape(), cfg.w0(), trainable);
  nd::Var w1 = params.bind(view.values.tape(), cfg.w1(), trainable);
  if (x.cols() != w0.rows()) throw ArgumentError("predict: feature width does not match W0");
  nd::SparseVar norm = nd::gcn_normalize(view, true);
  nd::Var xw = nd::matmul(x, w0);
  // Dropout acts on the hidden layer only; X stays sparse.
  nd::Var h = nd::activate(cfg.activation, nd::spmm(norm, xw));
  if (rng && cfg.dropout > 0.0) h = nd::dropout(h, cfg.dropout, *rng);
  nd::Var logits = nd::spmm(norm, nd::matmul(h, w1));
  return nd::row_softmax(logits);
}

Variant parse_variant(std::string_view name) {
  if (name == "adaptive" || name == "adaption") return Variant::adaptive;
  if (name == "average") return Variant::average;
  if (name == "attention") return Variant::attention;
  throw ArgumentError("unknown fusion variant '" + std::string(name) + "'");
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::adaptive: return "adaptive";
    case Variant::average: return "average";
    case Variant::attention: return "attention";
  }
  return "?";
}

nd::Var confidence(nd::Var probs, const FusionConfig& cfg) {
  return nd::confidence(probs, cfg.epsilon, cfg.lambda, cfg.delta);
}

std::pair<nd::Var, nd::Var> fuse_weights(nd::Var pi1, nd::Var pi2) {
  nd::Var total = nd::add(pi1, pi2);
  return {nd::div(pi1, total), nd::div(pi2, total)};
}

nd::SparseVar fuse_views(const nd::SparseVar& v1, const nd::SparseVar& v2, nd::Var beta1,
                         nd::Var beta2, const PatternPtr& support) {
  if (v1.pattern->rows() != v2.pattern->rows()) throw ArgumentError("fuse_views: view sizes differ");
  return nd::sparse_add(nd::sparse_row_scale(nd::sparse_embed(v1, support), beta1),
                        nd::sparse_row_scale(nd::sparse_embed(v2, support), beta2));
}

std::pair<nd::Var, nd::Var> average_weights(nd::Tape& tape, std::size_t n) {
  return {tape.constant(Tensor(n, 1, 0.5)), tape.constant(Tensor(n, 1, 0.5))};
}

std::pair<nd::Var, nd::Var> attention_weights(nd::Tape& tape, std::size_t n, const ParamSet& params,
                                              bool trainable) {
  nd::Var gate = nd::row_softmax(params.bind(tape, kAttentionLogits, trainable));
  nd::Var ones = tape.constant(Tensor(n, 1, 1.0));
  nd::Var a1 = nd::matmul(gate, tape.constant(Tensor(2, 1, std::vector<double>{1.0, 0.0})));
  nd::Var a2 = nd::matmul(gate, tape.constant(Tensor(2, 1, std::vector<double>{0.0, 1.0})));
  return {nd::matmul(ones, a1), nd::matmul(ones, a2)};
}

View fuse_views(const View& v1, const View& v2, const Tensor& beta1, const Tensor& beta2) {
  if (beta1.rows() != v1.n() || beta2.rows() != v1.n()) throw ArgumentError("fuse_views: beta length");
  nd::Tape tape;
  auto support = pattern_union(*v1.weights.pattern, *v2.weights.pattern);
  auto out = fuse_views(tape.constant(v1.weights), tape.constant(v2.weights), tape.constant(beta1),
                        tape.constant(beta2), support);
  return View{out.value(), ViewKind::fused};
}

View fuse_variant_average(const View& v1, const View& v2) {
  return fuse_views(v1, v2, Tensor(v1.n(), 1, 0.5), Tensor(v1.n(), 1, 0.5));
}

View fuse_variant_attention(const View& v1, const View& v2, const Tensor& logits) {
  ParamSet ps;
  ps.add(kAttentionLogits, logits, Group::theta);
  nd::Tape tape;
  auto [a1, a2] = attention_weights(tape, v1.n(), ps, false);
  return fuse_views(v1, v2, a1.value(), a2.value());
}

}  // namespace cogsl::fusion
