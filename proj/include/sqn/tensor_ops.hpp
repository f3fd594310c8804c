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

// Differentiable ops over rank-2 tensors. Every op validates shapes,
// computes its forward value eagerly and registers a backward rule that
// accumulates into its inputs' gradients.

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "sqn/tensor.hpp"

namespace sqn {

template <typename Scalar>
using ColumnVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

template <typename Scalar>
void require_same_shape(const Tensor<Scalar>& a, const Tensor<Scalar>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

template <typename Scalar>
void require_axis(int axis, const char* op) {
  if (axis != 0 && axis != 1) throw ShapeError(std::string(op) + ": axis must be 0 or 1");
}

template <typename Scalar>
Matrix<Scalar>* grad_of(Node<Scalar>& self, std::size_t i) {
  auto& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

}  // namespace detail

template <typename Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + a.shape_string() + " x " +
                     b.shape_string());
  }
  Matrix<Scalar> out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return Tensor<Scalar>::from_op(std::move(out), {a, b}, [](detail::Node<Scalar>& self) {
    const auto& A = self.parents[0]->value;
    const auto& B = self.parents[1]->value;
    if (auto* ga = detail::grad_of(self, 0)) ga->noalias() += self.grad * B.transpose();
    if (auto* gb = detail::grad_of(self, 1)) gb->noalias() += A.transpose() * self.grad;
  });
}

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "add");
  return Tensor<Scalar>::from_op(a.value() + b.value(), {a, b}, [](detail::Node<Scalar>& self) {
    if (auto* ga = detail::grad_of(self, 0)) *ga += self.grad;
    if (auto* gb = detail::grad_of(self, 1)) *gb += self.grad;
  });
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "sub");
  return Tensor<Scalar>::from_op(a.value() - b.value(), {a, b}, [](detail::Node<Scalar>& self) {
    if (auto* ga = detail::grad_of(self, 0)) *ga += self.grad;
    if (auto* gb = detail::grad_of(self, 1)) *gb -= self.grad;
  });
}

/// Elementwise product.
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_same_shape(a, b, "mul");
  Matrix<Scalar> out = a.value().cwiseProduct(b.value());
  return Tensor<Scalar>::from_op(std::move(out), {a, b}, [](detail::Node<Scalar>& self) {
    if (auto* ga = detail::grad_of(self, 0)) *ga += self.grad.cwiseProduct(self.parents[1]->value);
    if (auto* gb = detail::grad_of(self, 1)) *gb += self.grad.cwiseProduct(self.parents[0]->value);
  });
}

/// Adds a 1 x m bias row to every row of an n x m tensor.
template <typename Scalar>
Tensor<Scalar> add_bias(const Tensor<Scalar>& a, const Tensor<Scalar>& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_bias: bias " + bias.shape_string() + " does not fit " + a.shape_string());
  }
  Matrix<Scalar> out = a.value().rowwise() + bias.value().row(0);
  return Tensor<Scalar>::from_op(std::move(out), {a, bias}, [](detail::Node<Scalar>& self) {
    if (auto* ga = detail::grad_of(self, 0)) *ga += self.grad;
    if (auto* gb = detail::grad_of(self, 1)) *gb += self.grad.colwise().sum();
  });
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& a, Scalar s) {
  return Tensor<Scalar>::from_op(a.value() * s, {a}, [s](detail::Node<Scalar>& self) {
    if (auto* ga = detail::grad_of(self, 0)) *ga += self.grad * s;
  });
}

/// Multiplies row i by the constant weights[i].
template <typename Scalar>
Tensor<Scalar> scale_rows(const Tensor<Scalar>& a, ColumnVector<Scalar> weights) {
  if (weights.size() != a.rows()) {
    throw ShapeError("scale_rows: " + std::to_string(weights.size()) + " weights for " +
                     a.shape_string());
  }
  Matrix<Scalar> out = weights.asDiagonal() * a.value();
  return Tensor<Scalar>::from_op(
      std::move(out), {a}, [w = std::move(weights)](detail::Node<Scalar>& self) {
        if (auto* ga = detail::grad_of(self, 0)) *ga += w.asDiagonal() * self.grad;
      });
}

template <typename Scalar>
Tensor<Scalar> concat(const std::vector<Tensor<Scalar>>& parts, int axis) {
  detail::require_axis<Scalar>(axis, "concat");
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Eigen::Index rows = 0, cols = 0;
  for (const auto& p : parts) {
    if (axis == 1) {
      if (p.rows() != parts[0].rows()) {
        throw ShapeError("concat: row counts differ, " + parts[0].shape_string() + " vs " +
                         p.shape_string());
      }
      cols += p.cols();
    } else {
      if (p.cols() != parts[0].cols()) {
        throw ShapeError("concat: column counts differ, " + parts[0].shape_string() + " vs " +
                         p.shape_string());
      }
      rows += p.rows();
    }
  }
  if (axis == 1) rows = parts[0].rows();
  else cols = parts[0].cols();

  Matrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    if (axis == 1) {
      out.middleCols(at, p.cols()) = p.value();
      at += p.cols();
    } else {
      out.middleRows(at, p.rows()) = p.value();
      at += p.rows();
    }
  }
  return Tensor<Scalar>::from_op(std::move(out), parts, [axis](detail::Node<Scalar>& self) {
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      const auto& v = self.parents[i]->value;
      if (auto* g = detail::grad_of(self, i)) {
        if (axis == 1) *g += self.grad.middleCols(at, v.cols());
        else *g += self.grad.middleRows(at, v.rows());
      }
      at += axis == 1 ? v.cols() : v.rows();
    }
  });
}

/// `count` rows (axis 0) or columns (axis 1) starting at `begin`.
template <typename Scalar>
Tensor<Scalar> slice(const Tensor<Scalar>& a, int axis, Eigen::Index begin, Eigen::Index count) {
  detail::require_axis<Scalar>(axis, "slice");
  const Eigen::Index extent = axis == 0 ? a.rows() : a.cols();
  if (begin < 0 || count < 0 || begin + count > extent) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + a.shape_string());
  }
  Matrix<Scalar> out = axis == 0 ? Matrix<Scalar>(a.value().middleRows(begin, count))
                                 : Matrix<Scalar>(a.value().middleCols(begin, count));
  return Tensor<Scalar>::from_op(std::move(out), {a}, [axis, begin, count](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      if (axis == 0) g->middleRows(begin, count) += self.grad;
      else g->middleCols(begin, count) += self.grad;
    }
  });
}

/// Rows of `a` selected by `rows` (repeats allowed). Backward scatters
/// gradients additively into the selected rows.
template <typename Scalar>
Tensor<Scalar> gather(const Tensor<Scalar>& a, std::span<const Eigen::Index> rows) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Matrix<Scalar> out(n, a.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) {
      throw ShapeError("gather: row " + std::to_string(rows[i]) + " outside " + a.shape_string());
    }
    out.row(i) = a.value().row(rows[i]);
  }
  if (!a.requires_grad()) return Tensor<Scalar>::constant(std::move(out));
  auto idx = std::make_shared<std::vector<Eigen::Index>>(rows.begin(), rows.end());
  return Tensor<Scalar>::from_op(std::move(out), {a}, [idx](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t i = 0; i < idx->size(); ++i) {
        g->row((*idx)[i]) += self.grad.row(static_cast<Eigen::Index>(i));
      }
    }
  });
}

template <typename Scalar>
Tensor<Scalar> leaky_relu(const Tensor<Scalar>& a, Scalar alpha) {
  Matrix<Scalar> out = a.value().unaryExpr([alpha](Scalar x) { return x > 0 ? x : alpha * x; });
  return Tensor<Scalar>::from_op(std::move(out), {a}, [alpha](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      const auto& x = self.parents[0]->value;
      *g += self.grad.binaryExpr(x, [alpha](Scalar dy, Scalar xv) { return xv > 0 ? dy : alpha * dy; });
    }
  });
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& a) {
  return leaky_relu(a, Scalar(0));
}

namespace detail {

template <typename Block>
void softmax_columns_inplace(Block&& x) {
  // softmax down each column of the block
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    auto col = x.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

}  // namespace detail

/// Softmax along `axis` (1: across each row's columns, 0: down each column).
template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& a, int axis) {
  detail::require_axis<Scalar>(axis, "softmax");
  Matrix<Scalar> out = a.value();
  if (axis == 0) {
    detail::softmax_columns_inplace(out);
  } else {
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      auto row = out.row(r);
      row.array() -= row.maxCoeff();
      row = row.array().exp().matrix();
      row /= row.sum();
    }
  }
  return Tensor<Scalar>::from_op(out, {a}, [axis, y = out](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      const Matrix<Scalar> gy = self.grad.cwiseProduct(y);
      if (axis == 0) {
        *g += gy - (y.array().rowwise() * gy.colwise().sum().array()).matrix();
      } else {
        *g += gy - (y.array().colwise() * gy.rowwise().sum().array()).matrix();
      }
    }
  });
}

/// Softmax down each column within consecutive blocks of `group` rows.
/// An (N*K) x D input holds K neighbor rows per point; each point gets its
/// own softmax over its K rows.
template <typename Scalar>
Tensor<Scalar> segment_softmax(const Tensor<Scalar>& a, Eigen::Index group) {
  if (group < 1 || a.rows() % group != 0) {
    throw ShapeError("segment_softmax: " + a.shape_string() + " is not divisible into groups of " +
                     std::to_string(group));
  }
  Matrix<Scalar> out = a.value();
  const Eigen::Index blocks = out.rows() / group;
  for (Eigen::Index b = 0; b < blocks; ++b) {
    detail::softmax_columns_inplace(out.middleRows(b * group, group));
  }
  return Tensor<Scalar>::from_op(out, {a}, [group, y = out](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      const Matrix<Scalar> gy = self.grad.cwiseProduct(y);
      const Eigen::Index blocks = y.rows() / group;
      for (Eigen::Index b = 0; b < blocks; ++b) {
        const auto yb = y.middleRows(b * group, group);
        const auto gyb = gy.middleRows(b * group, group);
        g->middleRows(b * group, group) +=
            gyb - (yb.array().rowwise() * gyb.colwise().sum().array()).matrix();
      }
    }
  });
}

/// Sums consecutive blocks of `group` rows: (N*K) x D -> N x D.
template <typename Scalar>
Tensor<Scalar> segment_sum(const Tensor<Scalar>& a, Eigen::Index group) {
  if (group < 1 || a.rows() % group != 0) {
    throw ShapeError("segment_sum: " + a.shape_string() + " is not divisible into groups of " +
                     std::to_string(group));
  }
  const Eigen::Index blocks = a.rows() / group;
  Matrix<Scalar> out = Matrix<Scalar>::Zero(blocks, a.cols());
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (Eigen::Index k = 0; k < group; ++k) out.row(b) += a.value().row(b * group + k);
  }
  return Tensor<Scalar>::from_op(std::move(out), {a}, [group](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (Eigen::Index r = 0; r < g->rows(); ++r) g->row(r) += self.grad.row(r / group);
    }
  });
}

/// Sum along `axis`: axis 0 gives 1 x m, axis 1 gives n x 1.
template <typename Scalar>
Tensor<Scalar> reduce_sum(const Tensor<Scalar>& a, int axis) {
  detail::require_axis<Scalar>(axis, "reduce_sum");
  Matrix<Scalar> out = axis == 0 ? Matrix<Scalar>(a.value().colwise().sum())
                                 : Matrix<Scalar>(a.value().rowwise().sum());
  return Tensor<Scalar>::from_op(std::move(out), {a}, [axis](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      if (axis == 0) g->rowwise() += self.grad.row(0);
      else g->colwise() += self.grad.col(0);
    }
  });
}

template <typename Scalar>
Tensor<Scalar> reduce_mean(const Tensor<Scalar>& a, int axis) {
  detail::require_axis<Scalar>(axis, "reduce_mean");
  const Eigen::Index n = axis == 0 ? a.rows() : a.cols();
  if (n == 0) throw ShapeError("reduce_mean over an empty axis of " + a.shape_string());
  return scale(reduce_sum(a, axis), Scalar(1) / static_cast<Scalar>(n));
}

/// Sum of all entries as a 1 x 1 tensor.
template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& a) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return Tensor<Scalar>::from_op(std::move(out), {a}, [](detail::Node<Scalar>& self) {
    if (auto* g = detail::grad_of(self, 0)) g->array() += self.grad(0, 0);
  });
}

/// Mean over rows of  weight[label] * -log softmax(logits)[label]  as a 1 x 1 tensor.
template <typename Scalar>
Tensor<Scalar> cross_entropy(const Tensor<Scalar>& logits, std::span<const int> labels,
                             std::span<const Scalar> class_weights) {
  const Eigen::Index q = logits.rows();
  const Eigen::Index c = logits.cols();
  if (q == 0) throw ShapeError("cross_entropy: empty batch");
  if (static_cast<Eigen::Index>(labels.size()) != q) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                     logits.shape_string());
  }
  if (static_cast<Eigen::Index>(class_weights.size()) != c) {
    throw ShapeError("cross_entropy: " + std::to_string(class_weights.size()) +
                     " class weights for logits " + logits.shape_string());
  }
  Matrix<Scalar> prob = logits.value();
  Scalar total = 0;
  for (Eigen::Index r = 0; r < q; ++r) {
    if (labels[r] < 0 || labels[r] >= c) {
      throw ShapeError("cross_entropy: label " + std::to_string(labels[r]) + " outside " +
                       std::to_string(c) + " classes");
    }
    auto row = prob.row(r);
    const Scalar m = row.maxCoeff();
    row.array() -= m;
    const Scalar log_z = std::log(row.array().exp().sum());
    total += class_weights[labels[r]] * (log_z - row(labels[r]));
    row = (row.array() - log_z).exp().matrix();
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = total / static_cast<Scalar>(q);
  std::vector<int> ys(labels.begin(), labels.end());
  std::vector<Scalar> ws(class_weights.begin(), class_weights.end());
  return Tensor<Scalar>::from_op(
      std::move(out), {logits},
      [p = std::move(prob), ys = std::move(ys), ws = std::move(ws)](detail::Node<Scalar>& self) {
        if (auto* g = detail::grad_of(self, 0)) {
          const Scalar s = self.grad(0, 0) / static_cast<Scalar>(p.rows());
          for (Eigen::Index r = 0; r < p.rows(); ++r) {
            const Scalar w = ws[ys[r]] * s;
            g->row(r) += w * p.row(r);
            (*g)(r, ys[r]) -= w;
          }
        }
      });
}

}  // namespace sqn
