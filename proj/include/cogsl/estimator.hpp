#pragma once

// View estimator: embed with one GCN layer, score scoped node pairs with a
// linear layer over [z_i || z_j], softmax the scores within each node's
// scope and blend the result back into the basic view.

#include <cstdint>
#include <random>
#include <string>

#include "cogsl/ops.hpp"
#include "cogsl/params.hpp"
#include "cogsl/views.hpp"

namespace cogsl::estimator {

struct EstimatorParams {
  std::string prefix = "est1";
  /// Combination coefficient; must lie in (0, 1].
  double mu = 0.5;
  nd::Activation activation = nd::Activation::elu;
  /// Dropout on the embedding, applied only while Omega trains.
  double dropout = 0.0;

  std::string weight() const { return prefix + ".W"; }
  std::string pair_weight() const { return prefix + ".w_pair"; }
  std::string pair_bias() const { return prefix + ".b_pair"; }
};

/// Registers W (d_in x d_es), w_pair (2 d_es x 1) and a scalar bias in
/// group Omega.
void init_params(ParamSet& params, const EstimatorParams& cfg, std::size_t d_in, std::size_t d_es,
                 std::uint64_t seed);

/// Z = act(gcn_layer(view, X, W)).
nd::Var embed(const nd::SparseVar& view, const CsrMatrix& x, nd::Var w, nd::Activation act);

/// score(i, j) = w_pair . [z_i || z_j] + b for every (i, j) in the scope
/// pattern; only scoped pairs are materialised.
nd::SparseVar pair_scores(nd::Var z, const PatternPtr& scope, nd::Var w_pair, nd::Var b);

/// Row-wise softmax of the scores over each scope.
nd::SparseVar estimate_probabilities(const nd::SparseVar& scores);

/// V + mu * P expressed on `support` (which must contain both patterns).
nd::SparseVar blend(const CsrMatrix& base, const nd::SparseVar& p, double mu, const PatternPtr& support);

/// Value-level blend on the union of the two supports.
View blend(const View& base, const View& p, double mu);

/// One basic view with its scope and parameters; produces V_es on a tape.
class ViewEstimator {
 public:
  ViewEstimator(View basic, const ScopeSet& scope, EstimatorParams cfg);

  const View& basic() const { return basic_; }
  const EstimatorParams& config() const { return cfg_; }
  const PatternPtr& scope_pattern() const { return scope_; }
  /// support(V) union scope: the pattern of the estimated view.
  const PatternPtr& support() const { return support_; }

  /// Records the full estimate. `rng` enables embedding dropout when given.
  nd::SparseVar estimate(nd::Tape& tape, const CsrMatrix& x, const ParamSet& params, bool trainable,
                         std::mt19937_64* rng = nullptr) const;

 private:
  View basic_;
  EstimatorParams cfg_;
  PatternPtr scope_;
  PatternPtr support_;
  CsrMatrix base_on_support_;
};

}  // namespace cogsl::estimator
