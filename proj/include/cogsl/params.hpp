#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>

#include "cogsl/tape.hpp"
#include "cogsl/tensor.hpp"

namespace cogsl {

/// Optimisation group: classifiers, MI estimator, view estimators.
enum class Group : std::uint8_t { theta = 0, phi = 1, omega = 2 };
const char* to_string(Group g);

using GradMap = std::map<std::string, Tensor>;

/// Named parameters, each owned by exactly one group. Iteration order is the
/// lexicographic name order, which keeps every pass over it deterministic.
class ParamSet {
 public:
  struct Entry {
    Tensor value;
    Group group;
  };

  void add(const std::string& name, Tensor value, Group group);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const Tensor& value(const std::string& name) const;
  Tensor& value(const std::string& name);
  Group group(const std::string& name) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Puts a parameter on the tape: a gradient-tracking leaf if its group is
  /// being trained, otherwise a constant (gradients still flow through it).
  nd::Var bind(nd::Tape& tape, const std::string& name, bool trainable) const;

  bool operator==(const ParamSet&) const;

 private:
  std::map<std::string, Entry> entries_;
};

/// Per-group Adam state (beta1 0.9, beta2 0.999, eps 1e-8).
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> moments;
};

/// Standard bias-corrected Adam update on every parameter of `group`;
/// parameters of other groups are untouched. `weight_decay` adds an L2
/// term to the gradient. Throws if a group member has no gradient.
void adam_step(ParamSet& params, const GradMap& grads, AdamState& state, double lr, Group group,
               double weight_decay = 0.0);

/// Uniform on +-sqrt(6 / (rows + cols)).
Tensor glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Binary checkpoint: "COGSLCK1", u64 count, then per parameter
/// u32 name length, name, u8 group, u64 rows, u64 cols, little-endian doubles.
void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace cogsl
