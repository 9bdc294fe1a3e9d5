#include "cogsl/mi.hpp"

#include <algorithm>
#include <numeric>

#include "cogsl/error.hpp"

namespace cogsl::mi {

const char* to_string(Which w) {
  switch (w) {
    case Which::star: return "star";
    case Which::v1: return "v1";
    case Which::v2: return "v2";
  }
  return "?";
}

std::string encoder_weight(Which w) { return std::string("mi.enc_") + to_string(w) + ".W"; }
std::string encoder_slope(Which w) { return std::string("mi.enc_") + to_string(w) + ".slope"; }

void init_params(ParamSet& params, const MIParams& cfg, std::size_t d_in, std::uint64_t seed) {
  std::uint64_t s = seed;
  for (Which w : {Which::star, Which::v1, Which::v2}) {
    params.add(encoder_weight(w), glorot_init(d_in, cfg.hidden, s++), Group::phi);
    params.add(encoder_slope(w), Tensor::scalar(0.25), Group::phi);
  }
  params.add(kProjW0, glorot_init(cfg.hidden, cfg.proj_hidden, s++), Group::phi);
  params.add(kProjB0, Tensor(1, cfg.proj_hidden), Group::phi);
  params.add(kProjW1, glorot_init(cfg.proj_hidden, cfg.hidden, s++), Group::phi);
  params.add(kProjB1, Tensor(1, cfg.hidden), Group::phi);
}

nd::Var mi_embed(const nd::SparseVar& view, const CsrMatrix& x, const ParamSet& params, Which which,
                 bool trainable) {
  nd::Tape& tape = view.values.tape();
  nd::Var w = params.bind(tape, encoder_weight(which), trainable);
  nd::Var slope = params.bind(tape, encoder_slope(which), trainable);
  return nd::prelu(nd::gcn_layer(view, x, w), slope);
}

Projection Projection::bind(nd::Tape& tape, const ParamSet& params, const MIParams& cfg, bool trainable) {
  return Projection{params.bind(tape, kProjW0, trainable), params.bind(tape, kProjB0, trainable),
                    params.bind(tape, kProjW1, trainable), params.bind(tape, kProjB1, trainable),
                    cfg.proj_activation};
}

nd::Var Projection::operator()(nd::Var h) const {
  nd::Var hidden = nd::activate(activation, nd::add_row_bias(nd::matmul(h, w0), b0));
  return nd::add_row_bias(nd::matmul(hidden, w1), b1);
}

nd::Var infonce(nd::Var hp_a, nd::Var hp_b, std::span<const std::size_t> batch, double tau) {
  if (batch.empty()) throw ArgumentError("InfoNCE batch is empty");
  nd::Var a = nd::row_l2_normalize(nd::gather_rows(hp_a, batch));
  nd::Var b = nd::row_l2_normalize(nd::gather_rows(hp_b, batch));
  return nd::infonce_normalized(a, b, tau);
}

MILosses mi_total(const nd::SparseVar& v_star, const nd::SparseVar& v1, const nd::SparseVar& v2,
                  const CsrMatrix& x, const ParamSet& params, const MIParams& cfg,
                  std::span<const std::size_t> batch, bool trainable) {
  nd::Tape& tape = v_star.values.tape();
  Projection proj = Projection::bind(tape, params, cfg, trainable);
  nd::Var hs = proj(mi_embed(v_star, x, params, Which::star, trainable));
  nd::Var h1 = proj(mi_embed(v1, x, params, Which::v1, trainable));
  nd::Var h2 = proj(mi_embed(v2, x, params, Which::v2, trainable));
  MILosses out;
  out.star_v1 = infonce(hs, h1, batch, cfg.tau);
  out.star_v2 = infonce(hs, h2, batch, cfg.tau);
  out.v1_v2 = infonce(h1, h2, batch, cfg.tau);
  out.total = nd::add(nd::add(out.star_v1, out.star_v2), out.v1_v2);
  return out;
}

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t size, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size == 0 || size >= n) return idx;
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace cogsl::mi
