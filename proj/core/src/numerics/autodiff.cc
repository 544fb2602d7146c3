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

#include "ifcgrasp/numerics/autodiff.h"

#include <algorithm>
#include <atomic>
#include <unordered_set>

namespace ifcgrasp::num {
namespace {

thread_local bool grad_enabled = true;
std::atomic<uint64_t> node_counter{0};

}  // namespace

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }

bool GradEnabled() { return grad_enabled; }

uint64_t NextNodeOrder() {
  return node_counter.fetch_add(1, std::memory_order_relaxed);
}

template <typename T>
void Backward(const Var<T>& root) {
  if (!root.defined() || root.size() != 1) {
    throw ShapeError("Backward() requires a scalar root");
  }
  if (!root.requires_grad()) return;

  std::vector<Node<T>*> nodes;
  std::unordered_set<Node<T>*> seen;
  std::vector<Node<T>*> stack{root.node()};
  seen.insert(root.node());
  while (!stack.empty()) {
    Node<T>* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& in : n->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) {
        stack.push_back(in.get());
      }
    }
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const Node<T>* a, const Node<T>* b) { return a->order > b->order; });
  for (Node<T>* n : nodes) n->grad = Array<T>();

  root.node()->GradBuffer()[0] = T(1);
  for (Node<T>* n : nodes) {
    if (n->grad.empty()) continue;
    if (n->backward) n->backward(*n);
    if (n->param != nullptr) {
      T* dst = n->param->grad.data();
      const T* src = n->grad.data();
      for (int64_t i = 0; i < n->grad.size(); ++i) dst[i] += src[i];
    }
  }
}

template void Backward<float>(const Var<float>&);
template void Backward<double>(const Var<double>&);

}  // namespace ifcgrasp::num
