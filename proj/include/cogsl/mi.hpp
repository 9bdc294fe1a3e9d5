#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cogsl/ops.hpp"
#include "cogsl/params.hpp"

namespace cogsl::mi {

/// MI estimator hyper-parameters. All weights belong to group Phi.
struct MIParams {
  std::size_t hidden = 16;
  std::size_t proj_hidden = 16;
  double tau = 0.5;
  /// Nodes per InfoNCE batch; 0 means all nodes.
  std::size_t batch = 0;
  nd::Activation proj_activation = nd::Activation::elu;
};

enum class Which { star, v1, v2 };
const char* to_string(Which w);

std::string encoder_weight(Which w);
std::string encoder_slope(Which w);
inline const std::string kProjW0 = "mi.proj.W0";
inline const std::string kProjB0 = "mi.proj.b0";
inline const std::string kProjW1 = "mi.proj.W1";
inline const std::string kProjB1 = "mi.proj.b1";

void init_params(ParamSet& params, const MIParams& cfg, std::size_t d_in, std::uint64_t seed);

/// H = PReLU(gcn_layer(view, X, W_which)).
nd::Var mi_embed(const nd::SparseVar& view, const CsrMatrix& x, const ParamSet& params, Which which,
                 bool trainable);

/// Shared projection head bound once per tape.
struct Projection {
  nd::Var w0, b0, w1, b1;
  nd::Activation activation = nd::Activation::elu;

  static Projection bind(nd::Tape& tape, const ParamSet& params, const MIParams& cfg, bool trainable);
  /// act(H W0 + b0) W1 + b1.
  nd::Var operator()(nd::Var h) const;
};

/// Symmetric InfoNCE over the batch rows of two projected embeddings.
nd::Var infonce(nd::Var hp_a, nd::Var hp_b, std::span<const std::size_t> batch, double tau);

struct MILosses {
  nd::Var star_v1;
  nd::Var star_v2;
  nd::Var v1_v2;
  nd::Var total;
};

/// L(V*, V1es) + L(V*, V2es) + L(V1es, V2es) on one shared batch.
MILosses mi_total(const nd::SparseVar& v_star, const nd::SparseVar& v1, const nd::SparseVar& v2,
                  const CsrMatrix& x, const ParamSet& params, const MIParams& cfg,
                  std::span<const std::size_t> batch, bool trainable);

/// Uniform sample without replacement, sorted; all nodes when size is 0 or >= n.
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t size, std::mt19937_64& rng);

}  // namespace cogsl::mi
