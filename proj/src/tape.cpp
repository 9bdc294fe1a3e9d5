#include "cogsl/tape.hpp"

#include "cogsl/error.hpp"

namespace cogsl::nd {

const Tensor& Var::value() const { return tape_->value(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

SparseVar Tape::constant(const CsrMatrix& m) {
  return SparseVar{m.pattern, constant(Tensor(m.nnz(), 1, m.values))};
}

Var Tape::leaf(Tensor value, std::string name) {
  nodes_.push_back(Node{std::move(value), {}, true, std::move(name), {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.valid() && &p.tape() != this) throw ArgumentError("operand recorded on another tape");
    needs = needs || (p.valid() && p.requires_grad());
  }
  nodes_.push_back(Node{std::move(value), {}, needs, {}, needs ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty() && !n.value.empty()) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor& Tape::grad_accum(Var v) {
  Node& n = nodes_[v.id()];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (backward_done_) throw ArgumentError("backward already ran on this tape; record a new one");
  const Tensor& lv = loss.value();
  if (lv.rows() != 1 || lv.cols() != 1) throw ArgumentError("backward needs a scalar (1x1) loss");
  backward_done_ = true;
  if (!loss.requires_grad()) return;
  grad_accum(loss)[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

std::map<std::string, Tensor> Tape::gradients() const {
  std::map<std::string, Tensor> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || n.name.empty()) continue;
    Tensor g = grad(Var(const_cast<Tape*>(this), id));
    auto it = out.find(n.name);
    if (it == out.end()) out.emplace(n.name, std::move(g));
    else it->second.add_inplace(g);
  }
  return out;
}

}  // namespace cogsl::nd
