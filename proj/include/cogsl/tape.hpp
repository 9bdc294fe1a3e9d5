#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <string>

#include "cogsl/sparse.hpp"
#include "cogsl/tensor.hpp"

namespace cogsl::nd {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Sparse matrix whose stored values are a differentiable nnz x 1 Var on a
/// fixed pattern.
struct SparseVar {
  PatternPtr pattern;
  Var values;

  CsrMatrix value() const { return CsrMatrix(pattern, values.value().storage()); }
};

/// Records operations in execution order; backward() walks them in reverse.
/// Nodes live in a deque so references to earlier values stay valid while
/// new nodes are appended.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  SparseVar constant(const CsrMatrix& m);
  /// Leaf that accumulates a gradient, reported under `name` by gradients().
  Var leaf(Tensor value, std::string name = {});

  /// Appends an op node. The node requires grad iff any parent does; the
  /// backward function is discarded otherwise.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient reaching `v` during backward (zeros if none did).
  Tensor grad(Var v) const;
  /// Mutable gradient buffer, allocated on first use. For op implementations.
  Tensor& grad_accum(Var v);

  /// Reverse sweep from a 1 x 1 loss. A tape supports one backward pass.
  void backward(Var loss);
  bool backward_done() const { return backward_done_; }

  /// Gradients of every named leaf; leaves sharing a name are summed.
  std::map<std::string, Tensor> gradients() const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::string name;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace cogsl::nd
