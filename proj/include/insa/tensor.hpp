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

// Dense rank-4 float tensors with tape-free reverse-mode differentiation.
//
// Every op result keeps shared references to its inputs and a closure that
// pushes its output gradient back into them. backward() walks that graph in
// a fixed topological order, so gradients are bitwise reproducible.

#ifndef INSA_TENSOR_HPP_
#define INSA_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace insa {

struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor;

namespace detail {

struct Node {
  Shape shape;
  std::vector<float> value;
  std::vector<float> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Node&)> backward;

  std::vector<float>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0f);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  // A leaf that collects gradients.
  static Tensor parameter(Shape shape, std::vector<float> values);
  static Tensor scalar(float v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }

  std::span<float> data() { return node_->value; }
  std::span<const float> data() const { return node_->value; }
  const std::vector<float>& values() const { return node_->value; }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  std::span<const float> grad() const { return node_->grad; }
  std::span<float> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  float item() const;
  float at(int n, int c, int h, int w) const {
    const Shape& s = node_->shape;
    return node_->value[((static_cast<std::size_t>(n) * s.c + c) * s.h + h) * s.w + w];
  }

  // Same values, no history.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape, std::vector<float>, std::vector<Tensor>,
                            std::function<void(const detail::Node&)>);

  std::shared_ptr<detail::Node> node_;
};

// Builds an op result. The backward closure is only attached when gradient
// recording is enabled and some input requires a gradient.
Tensor make_result(Shape shape, std::vector<float> value, std::vector<Tensor> inputs,
                   std::function<void(const detail::Node&)> backward);

// Adds `g` into the gradient buffer of `t` if `t` participates in backward.
void accumulate_grad(const Tensor& t, std::span<const float> g);

bool grad_enabled();

// Disables graph recording for its lifetime (eval-mode forwards).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Fills every reachable leaf's grad with d(loss)/d(leaf). `loss` must hold a
// single element.
void backward(const Tensor& loss);

}  // namespace insa

#endif  // INSA_TENSOR_HPP_
