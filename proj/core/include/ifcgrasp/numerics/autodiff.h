// Copyright 2026 The ifcgrasp Authors
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

// Reverse-mode differentiation over dynamically built graphs.
//
// Every op returns a Var that owns a Node holding the forward value. When at
// least one input requires a gradient (and gradient recording is enabled on
// this thread), the node also keeps its inputs alive and a closure that pushes
// the node's gradient into them. Nodes are stamped with a global creation
// order, so reverse creation order is a valid topological order for the
// backward sweep.

#ifndef IFCGRASP_NUMERICS_AUTODIFF_H_
#define IFCGRASP_NUMERICS_AUTODIFF_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ifcgrasp/numerics/array.h"

namespace ifcgrasp::num {

template <typename T>
struct Parameter {
  std::string name;
  Array<T> value;
  Array<T> grad;  // same shape as value
  bool trainable = true;
};

// Owns a model's parameters with stable addresses and unique names.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter<T>& Add(const std::string& name, Array<T> init) {
    if (index_.count(name)) {
      throw InvariantError("duplicate parameter name: " + name);
    }
    Parameter<T>& p = params_.emplace_back();
    p.name = name;
    p.grad = Array<T>(init.shape());
    p.value = std::move(init);
    index_[name] = params_.size() - 1;
    return p;
  }

  Parameter<T>* Find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
  }
  const Parameter<T>* Find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
  }

  // Registration order.
  std::vector<Parameter<T>*> All() {
    std::vector<Parameter<T>*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(&p);
    return out;
  }
  std::vector<const Parameter<T>*> All() const {
    std::vector<const Parameter<T>*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(&p);
    return out;
  }

  size_t size() const { return params_.size(); }
  int64_t NumScalars() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void ZeroGrad() {
    for (auto& p : params_) p.grad.Fill(T(0));
  }

  // Copies values by name from a store of possibly different precision.
  // Both stores must hold the same names and shapes.
  template <typename U>
  void CopyValuesFrom(const ParameterStore<U>& other) {
    if (other.size() != size()) {
      throw ShapeError("parameter stores differ in size");
    }
    for (auto& p : params_) {
      const Parameter<U>* src = other.Find(p.name);
      if (src == nullptr || src->value.shape() != p.value.shape()) {
        throw ShapeError("parameter mismatch for " + p.name);
      }
      p.value = src->value.template Cast<T>();
    }
  }

 private:
  std::deque<Parameter<T>> params_;
  std::map<std::string, size_t> index_;
};

template <typename T>
struct Node {
  Array<T> value;
  Array<T> grad;  // allocated on first accumulation
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;
  Parameter<T>* param = nullptr;
  uint64_t order = 0;
  bool requires_grad = false;

  Array<T>& GradBuffer() {
    if (grad.empty() && !value.empty()) grad = Array<T>(value.shape());
    if (grad.shape() != value.shape()) grad = Array<T>(value.shape());
    return grad;
  }
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  const Array<T>& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  int dim(int axis) const { return node_->value.dim(axis); }
  int64_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool defined() const { return node_ != nullptr; }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& ptr() const { return node_; }

  // Gradient of the last Backward() with respect to this value. Empty if the
  // node was not reached.
  const Array<T>& grad() const { return node_->grad; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Thread-local switch; while a guard is alive no graph edges are recorded.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();
uint64_t NextNodeOrder();

// Builds an op result. `backward` receives the finished node; it is dropped
// (and inputs released) when no input needs a gradient.
template <typename T>
Var<T> MakeVar(Array<T> value, std::vector<Var<T>> inputs,
               std::function<void(Node<T>&)> backward) {
  if (!value.AllFinite()) {
    throw NumericError("non-finite value produced by op with output shape " +
                       ShapeString(value.shape()));
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->order = NextNodeOrder();
  bool any = false;
  if (GradEnabled()) {
    for (const Var<T>& in : inputs) any = any || in.requires_grad();
  }
  if (any) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (const Var<T>& in : inputs) node->inputs.push_back(in.ptr());
    node->backward = std::move(backward);
  }
  return Var<T>(std::move(node));
}

// Leaf that never requires a gradient.
template <typename T>
Var<T> Constant(Array<T> value) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->order = NextNodeOrder();
  return Var<T>(std::move(node));
}

// Leaf bound to a parameter; Backward() accumulates into `param.grad`.
template <typename T>
Var<T> Leaf(Parameter<T>& param) {
  auto node = std::make_shared<Node<T>>();
  node->value = param.value;
  node->order = NextNodeOrder();
  if (GradEnabled() && param.trainable) {
    node->requires_grad = true;
    node->param = &param;
  }
  return Var<T>(std::move(node));
}

// Accumulates d(root)/d(x) for every reachable node. `root` must hold a single
// element. Parameter gradients are added to (not overwritten in) Parameter::grad.
template <typename T>
void Backward(const Var<T>& root);

}  // namespace ifcgrasp::num

#endif  // IFCGRASP_NUMERICS_AUTODIFF_H_
