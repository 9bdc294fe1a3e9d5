#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cogsl/estimator.hpp"
#include "cogsl/fusion.hpp"
#include "cogsl/graph.hpp"
#include "cogsl/metrics.hpp"
#include "cogsl/mi.hpp"
#include "cogsl/params.hpp"
#include "cogsl/views.hpp"

namespace cogsl {

struct TrainConfig {
  std::size_t T = 100;
  std::size_t rho_theta = 1;
  std::size_t rho_phi = 5;
  std::size_t rho_omega = 1;
  double lr_theta = 0.01;
  double lr_phi = 0.01;
  double lr_omega = 0.01;
  double weight_decay_theta = 5e-4;
  /// Weight of the MI term in the Omega objective.
  double eta = 0.1;
  std::size_t d_es = 16;
  estimator::EstimatorParams est1{"est1"};
  estimator::EstimatorParams est2{"est2"};
  fusion::ClassifierParams classifier;
  fusion::FusionConfig fusion;
  mi::MIParams mi;
  /// Stop after this many iterations without a new best; 0 disables.
  std::size_t patience = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Values of the three views for one parameter state.
struct ViewValues {
  CsrMatrix v1es;
  CsrMatrix v2es;
  CsrMatrix vstar;
  Tensor beta1;
  Tensor beta2;
};

struct TrainState {
  ParamSet params;
  AdamState adam_theta;
  AdamState adam_phi;
  AdamState adam_omega;
  ViewValues views;
  std::size_t iteration = 0;
  ParamSet best;
  std::size_t best_iteration = 0;
  double best_val = -1.0;
  double best_val_loss = 0.0;
  bool early_stopped = false;
  std::size_t omega_steps = 0;
  std::size_t theta_steps = 0;
  std::size_t phi_steps = 0;
  double last_cls = 0.0;
  double last_objective = 0.0;
  double last_mi[3] = {0.0, 0.0, 0.0};
};

/// CE(O1) + CE(O2) + CE(O*) over the train nodes; labels[k] belongs to
/// train_idx[k].
nd::Var loss_cls(nd::Var o1, nd::Var o2, nd::Var ostar, std::span<const int> labels,
                 std::span<const std::size_t> train_idx);

inline const std::string kClassifier1 = "cls1";
inline const std::string kClassifier2 = "cls2";
inline const std::string kClassifierStar = "cls_star";

/// Alternating optimisation of view estimators (Omega), classifiers
/// (Theta) and MI estimator (Phi) over two basic views.
class Trainer {
 public:
  Trainer(const Graph& graph, View view1, const ScopeSet& scope1, View view2, const ScopeSet& scope2,
          TrainConfig cfg);

  const TrainConfig& config() const { return cfg_; }
  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }

  void step_omega();
  void step_theta();
  void step_phi();
  /// One outer iteration followed by validation and snapshotting. Returns
  /// the JSON line that describes it.
  std::string iterate();
  /// Runs up to T iterations; writes one JSON object per line to `log`.
  const TrainState& train(std::ostream* log = nullptr);

  /// Metrics of the V* classifier; `use_best` selects the snapshot.
  MetricsReport evaluate(Split split, bool use_best = true) const;
  /// Eval-mode views (no dropout) for a parameter state.
  ViewValues compute_views(const ParamSet& params) const;
  /// Eval-mode V* predictions.
  Tensor predict_star(const ParamSet& params) const;
  /// Eval-mode L_MI parts on `batch` (all nodes when empty).
  mi::MILosses mi_report(nd::Tape& tape, const ParamSet& params, std::span<const std::size_t> batch) const;

 private:
  struct Forward {
    nd::SparseVar v1, v2, vstar;
    nd::Var o1, o2, ostar, beta1, beta2;
  };
  std::pair<nd::Var, nd::Var> fusion_weights(nd::Tape& tape, const ParamSet& params, nd::Var o1,
                                             nd::Var o2, bool trainable) const;
  fusion::ClassifierParams classifier(const std::string& prefix) const;
  void check_finite(double loss, const char* step) const;
  void phi_update(const ViewValues& views);

  TrainConfig cfg_;
  CsrMatrix x_;
  std::size_t n_;
  LabeledSet train_;
  LabeledSet val_;
  LabeledSet test_;
  std::size_t n_classes_;
  estimator::ViewEstimator est1_;
  estimator::ViewEstimator est2_;
  PatternPtr fused_support_;
  std::mt19937_64 rng_;
  TrainState state_;
};

struct BaselineConfig {
  std::size_t epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  fusion::ClassifierParams classifier{"gcn"};
  std::size_t patience = 100;
  std::uint64_t seed = 0;
};

/// Plain two-layer GCN on one fixed view, model-selected by validation
/// F1-micro. Returns test metrics.
MetricsReport train_gcn_baseline(const Graph& graph, const View& view, const BaselineConfig& cfg);

}  // namespace cogsl
