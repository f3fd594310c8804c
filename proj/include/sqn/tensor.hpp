// Copyright 2026 The SQN Authors
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

#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sqn/error.hpp"

namespace sqn {

/// Row-major dense matrix; the storage of every tensor.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
class Tensor;

namespace detail {

template <typename Scalar>
struct Node {
  Matrix<Scalar> value;
  Matrix<Scalar> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  Matrix<Scalar>& grad_buffer() {
    if (grad.size() == 0) grad = Matrix<Scalar>::Zero(value.rows(), value.cols());
    return grad;
  }
};

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

}  // namespace detail

/// Disables graph recording on this thread for its lifetime (inference).
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// A rank-2 tensor with optional reverse-mode gradient tracking.
///
/// Tensors are cheap handles onto a shared graph node. Every op that has at
/// least one grad-requiring input records its inputs and a backward rule on
/// the result; ops on constants record nothing.
template <typename Scalar>
class Tensor {
 public:
  using Node = detail::Node<Scalar>;

  Tensor() = default;

  static Tensor constant(Matrix<Scalar> value) { return Tensor(std::move(value), false); }
  static Tensor parameter(Matrix<Scalar> value) { return Tensor(std::move(value), true); }

  bool defined() const { return static_cast<bool>(node_); }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  std::array<Eigen::Index, 2> shape() const { return {rows(), cols()}; }
  bool requires_grad() const { return node_->requires_grad; }

  const Matrix<Scalar>& value() const { return node_->value; }
  /// Direct access for optimizers and finite-difference probes.
  Matrix<Scalar>& mutable_value() { return node_->value; }

  bool has_grad() const { return node_->grad.size() != 0; }
  const Matrix<Scalar>& grad() const { return node_->grad; }
  Matrix<Scalar>& mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.resize(0, 0); }

  Scalar item() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("item() on a " + shape_string() + " tensor");
    return node_->value(0, 0);
  }

  std::string shape_string() const {
    return "[" + std::to_string(rows()) + "x" + std::to_string(cols()) + "]";
  }

  /// Result of an op. `backward` receives the result node; its parents are
  /// the op inputs in order.
  static Tensor from_op(Matrix<Scalar> value, std::vector<Tensor> inputs,
                        std::function<void(Node&)> backward) {
    Tensor out(std::move(value), false);
    if (!detail::grad_mode()) return out;
    bool any = false;
    for (const auto& t : inputs) any = any || t.requires_grad();
    if (!any) return out;
    out.node_->requires_grad = true;
    out.node_->parents.reserve(inputs.size());
    for (auto& t : inputs) out.node_->parents.push_back(t.node_);
    out.node_->backward = std::move(backward);
    return out;
  }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  Tensor(Matrix<Scalar> value, bool requires_grad) : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  std::shared_ptr<Node> node_;
};

/// Accumulates d(loss)/d(x) into every grad-requiring tensor reachable from
/// `loss`. Each node's backward rule runs once, in reverse topological order.
template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  using Node = detail::Node<Scalar>;
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward needs a scalar loss, got " + loss.shape_string());
  }
  if (!loss.requires_grad()) throw ArgumentError("backward on a loss that does not require grad");

  // Iterative post-order DFS; recursion depth would otherwise follow graph depth.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer().array() += Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad.size() != 0) node->backward(*node);
  }
}

}  // namespace sqn
