#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include "cogsl/ops.hpp"
#include "cogsl/params.hpp"
#include "cogsl/views.hpp"

namespace cogsl::fusion {

/// Two-layer GCN classifier on one view; weights live in group Theta.
struct ClassifierParams {
  std::string prefix = "cls1";
  std::size_t hidden = 16;
  nd::Activation activation = nd::Activation::elu;
  /// Dropout on the hidden layer while training.
  double dropout = 0.5;

  std::string w0() const { return prefix + ".W0"; }
  std::string w1() const { return prefix + ".W1"; }
};

void init_classifier(ParamSet& params, const ClassifierParams& cfg, std::size_t d_in,
                     std::size_t n_classes, std::uint64_t seed);

/// softmax(gcn(V, act(gcn(V, X W0))) W1). Rows sum to 1.
nd::Var predict(const nd::SparseVar& view, const CsrMatrix& x, const ParamSet& params,
                const ClassifierParams& cfg, bool trainable, std::mt19937_64* rng = nullptr);

enum class Variant { adaptive, average, attention };
Variant parse_variant(std::string_view name);
const char* to_string(Variant v);

struct FusionConfig {
  double epsilon = 0.1;
  double lambda = 0.5;
  double delta = 1e-8;
  Variant variant = Variant::adaptive;
};

/// Name of the 1 x 2 gate logits used by the attention variant (group Theta).
inline const std::string kAttentionLogits = "fusion.attention";

/// Per-node importance from prediction sharpness; N x 1, strictly positive.
nd::Var confidence(nd::Var probs, const FusionConfig& cfg);

/// beta1 = pi1 / (pi1 + pi2), beta2 = pi2 / (pi1 + pi2).
std::pair<nd::Var, nd::Var> fuse_weights(nd::Var pi1, nd::Var pi2);

/// Row-wise beta1 V1 + beta2 V2 on `support` (must contain both patterns).
nd::SparseVar fuse_views(const nd::SparseVar& v1, const nd::SparseVar& v2, nd::Var beta1,
                         nd::Var beta2, const PatternPtr& support);

/// Constant beta == 0.5 for every node.
std::pair<nd::Var, nd::Var> average_weights(nd::Tape& tape, std::size_t n);
/// softmax over two learned logits, broadcast to every node.
std::pair<nd::Var, nd::Var> attention_weights(nd::Tape& tape, std::size_t n, const ParamSet& params,
                                              bool trainable);

/// Value-level helpers.
View fuse_views(const View& v1, const View& v2, const Tensor& beta1, const Tensor& beta2);
View fuse_variant_average(const View& v1, const View& v2);
View fuse_variant_attention(const View& v1, const View& v2, const Tensor& logits);

}  // namespace cogsl::fusion
