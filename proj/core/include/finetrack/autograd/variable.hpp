#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "finetrack/autograd/tensor.hpp"

namespace finetrack::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// Propagates `self.grad` into the gradients of `self.inputs`.
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<NodePtr> inputs;
  BackwardFn backward;

  /// Gradient buffer, zero-initialized on first use.
  Tensor& grad_buffer();
  bool has_grad() const { return !grad.empty(); }
};

/// Handle to a node of the computation graph. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  static Var constant(Tensor value);
  static Var parameter(Tensor value);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  int dim(int axis) const { return node_->value.dim(axis); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_grad() const { return node_->has_grad(); }
  const Tensor& grad() const { return node_->grad; }
  void zero_grad() { node_->grad = Tensor(); }

  Node* node() const { return node_.get(); }
  const NodePtr& node_ptr() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  NodePtr node_;
};

/// Builds the output node of an op. The backward closure is kept only when
/// gradient recording is enabled and some input requires a gradient.
Var make_op_result(Tensor value, std::vector<Var> inputs, BackwardFn backward);

/// Reverse-mode sweep from a scalar root (seed gradient 1).
void backward(const Var& root);

bool grad_enabled();

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace finetrack::ad
