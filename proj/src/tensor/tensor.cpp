// Copyright 2026 The insa-codec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "insa/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace insa {
namespace {

thread_local bool g_grad_enabled = true;
thread_local std::uint64_t g_next_seq = 0;

std::shared_ptr<detail::Node> new_node(Shape shape, std::vector<float> value) {
  if (value.size() != shape.numel()) {
    throw std::invalid_argument("tensor data length " + std::to_string(value.size()) +
                                " does not match shape " + shape.str());
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(value);
  node->seq = g_next_seq++;
  return node;
}

}  // namespace

std::string Shape::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) +
         ", " + std::to_string(w) + ")";
}

Tensor::Tensor(Shape shape, float fill)
    : node_(new_node(shape, std::vector<float>(shape.numel(), fill))) {}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : node_(new_node(shape, std::move(values))) {}

Tensor Tensor::parameter(Shape shape, std::vector<float> values) {
  Tensor t(shape, std::move(values));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::scalar(float v) { return Tensor(Shape{}, std::vector<float>{v}); }

float Tensor::item() const {
  if (numel() != 1) {
    throw std::invalid_argument("item() on tensor of shape " + shape().str());
  }
  return node_->value[0];
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->value); }

Tensor make_result(Shape shape, std::vector<float> value, std::vector<Tensor> inputs,
                   std::function<void(const detail::Node&)> backward) {
  Tensor out(new_node(shape, std::move(value)));
  if (!g_grad_enabled) return out;
  bool any = std::any_of(inputs.begin(), inputs.end(),
                         [](const Tensor& t) { return t.requires_grad(); });
  if (!any) return out;
  out.node_->requires_grad = true;
  for (auto& t : inputs) {
    if (t.requires_grad()) out.node_->parents.push_back(t.node());
  }
  out.node_->backward = std::move(backward);
  return out;
}

void accumulate_grad(const Tensor& t, std::span<const float> g) {
  if (!t.requires_grad()) return;
  auto& buf = t.node()->grad_buffer();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw std::invalid_argument("backward() needs a single-element loss, got shape " +
                                (loss.defined() ? loss.shape().str() : std::string("<none>")));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; parents are visited in insertion order so the
  // resulting order depends only on how the graph was built.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  loss.node()->grad_buffer()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->backward || node->grad.empty()) continue;
    node->backward(*node);
    // Interior gradients are not needed once propagated.
    std::vector<float>().swap(node->grad);
  }
}

}  // namespace insa
