// Copyright 2026 The ECAT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ECAT_NN_TAPE_HPP_
#define ECAT_NN_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ecat/nn/tensor.hpp"

namespace ecat::nn {

// A trainable tensor with its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v, bool train = true)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()),
        trainable(train) {}

  void ZeroGrad() { grad = Tensor<T>(value.shape()); }
};

template <typename T>
class Tape;

// Handle to a value recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const { return tape->requires_grad(id); }
};

// Reverse-mode tape over a fixed operation set. A tape belongs to a single
// thread; parameters are read through pointers and only written by
// Backward().
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var<T> Constant(Tensor<T> value) { return Push(std::move(value), false); }

  // Leaf whose gradient is retrievable through Grad() after Backward().
  Var<T> Leaf(Tensor<T> value) { return Push(std::move(value), grad_enabled_); }

  Var<T> Param(Parameter<T>& p) {
    Node node;
    node.ref = &p.value;
    node.requires_grad = grad_enabled_ && p.trainable;
    node.param = node.requires_grad ? &p : nullptr;
    nodes_.push_back(std::move(node));
    return Var<T>{this, nodes_.size() - 1};
  }

  // Records an op result. `fn` is kept only if some input needs gradients.
  Var<T> Record(Tensor<T> value, bool requires_grad, BackwardFn fn) {
    if (!value.AllFinite()) {
      throw NonFiniteError("non-finite value produced at tape node " +
                           std::to_string(nodes_.size()));
    }
    Node node;
    node.value = std::move(value);
    node.requires_grad = grad_enabled_ && requires_grad;
    if (node.requires_grad) node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return Var<T>{this, nodes_.size() - 1};
  }

  const Tensor<T>& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient buffer of node `id`, zero-initialised on first touch.
  Tensor<T>& GradRef(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty() && !value(id).empty()) n.grad = Tensor<T>(value(id).shape());
    if (n.grad.shape() != value(id).shape()) n.grad = Tensor<T>(value(id).shape());
    return n.grad;
  }
  const Tensor<T>& Grad(Var<T> v) { return GradRef(v.id); }

  void Accumulate(std::size_t id, const Tensor<T>& g) {
    if (!nodes_[id].requires_grad) return;
    Tensor<T>& dst = GradRef(id);
    if (dst.size() != g.size()) throw ShapeError("gradient size mismatch");
    T* d = dst.data();
    const T* s = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += s[i];
  }

  // Seeds d(loss)/d(loss) = 1 and propagates to every recorded input.
  // Parameter gradients are added to Parameter::grad.
  void Backward(Var<T> loss) {
    if (loss.tape != this) throw std::invalid_argument("loss from another tape");
    if (value(loss.id).size() != 1) {
      throw ShapeError("backward() requires a scalar loss, got " +
                       ShapeToString(value(loss.id).shape()));
    }
    for (Node& n : nodes_) n.grad = Tensor<T>();
    if (!nodes_[loss.id].requires_grad) return;
    GradRef(loss.id)[0] = T{1};
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty()) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param) {
        Parameter<T>& p = *n.param;
        if (p.grad.shape() != p.value.shape()) p.ZeroGrad();
        for (std::size_t k = 0; k < n.grad.size(); ++k) p.grad[k] += n.grad[k];
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    const Tensor<T>* ref = nullptr;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  Var<T> Push(Tensor<T> value, bool requires_grad) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    nodes_.push_back(std::move(node));
    return Var<T>{this, nodes_.size() - 1};
  }

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

}  // namespace ecat::nn

#endif  // ECAT_NN_TAPE_HPP_
