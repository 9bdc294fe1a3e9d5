#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cogsl/params.hpp"
#include "cogsl/tape.hpp"

namespace cogsl::gradcheck {

/// A differentiable computation reduced to a scalar. The function must be
/// deterministic: it is re-run for every finite-difference probe.
///
/// Either `fn` receives the inputs as tape values, or (when `params` is
/// set) `param_fn` receives a ParamSet whose entries `param_names` hold the
/// inputs and binds them itself.
struct Case {
  std::string name;
  std::vector<Tensor> inputs;
  std::function<nd::Var(nd::Tape&, std::span<const nd::Var>)> fn;
  std::vector<std::string> param_names;
  std::shared_ptr<const ParamSet> params;
  std::function<nd::Var(nd::Tape&, const ParamSet&, bool trainable)> param_fn;
  /// Test hook: added to the analytic gradient of input 0 entry 0.
  double corrupt = 0.0;
};

struct Result {
  std::string name;
  double rel_error = 0.0;
  std::size_t n_entries = 0;
  bool pass = false;
};

/// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-8) over all
/// input entries, numeric by central differences with step h.
Result check(const Case& c, double h = 1e-5, double tol = 1e-4);

/// Every op and the composed pipelines.
std::vector<Case> registry();

std::vector<Result> run(const std::vector<Case>& cases, double h = 1e-5, double tol = 1e-4);

}  // namespace cogsl::gradcheck
