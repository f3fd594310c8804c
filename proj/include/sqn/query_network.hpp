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

#include <array>
#include <random>
#include <span>
#include <vector>

#include "sqn/encoder.hpp"

namespace sqn {

struct QueryConfig {
  /// Neighbors gathered per level; clamped to the level size when larger.
  int k = 3;
  /// Hidden widths of the classifier MLP; the output layer (C) is appended.
  std::vector<int> head_widths{256, 128, 96};
  /// Exponent p of the inverse-distance weights 1 / (d^p + epsilon).
  double distance_power = 2.0;
  /// Distance floor; neighbors closer than this snap the query onto them.
  double epsilon = 1e-8;
  /// Which encoder levels are queried (all four by default).
  std::array<bool, kNumLevels> levels{true, true, true, true};

  void validate() const;
  /// Width of the concatenated feature for the given level widths.
  int feature_width(const std::array<int, kNumLevels>& level_dims) const;
};

/// Normalized inverse-distance weights. When any distance is below
/// epsilon, the zero-distance neighbors share the weight equally and all
/// others get exactly zero.
std::vector<double> interpolation_weights(std::span<const double> distances, const QueryConfig& config);

/// Weighted blend of K neighbor feature rows (K x D) for one query.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> interpolate(const Matrix<Scalar>& neighbor_features,
                                                     std::span<const double> distances,
                                                     const QueryConfig& config);

struct LevelQuery {
  Index k = 0;                 ///< neighbors actually used (after clamping)
  std::vector<Index> indices;  ///< M x k rows of the level, flattened
  std::vector<double> distances;
  std::vector<double> weights;
};

template <typename Scalar>
struct QueryResult {
  std::array<LevelQuery, kNumLevels> levels;
  /// M x (sum of queried level widths), levels concatenated shallow to deep.
  Tensor<Scalar> features;
  /// M x C; undefined until classify has run.
  Tensor<Scalar> logits;
};

/// K-NN gather and interpolation at every queried level for M positions.
template <typename Scalar>
QueryResult<Scalar> query_features(const HierarchicalFeatures<Scalar>& hf, const Positions& queries,
                                   const QueryConfig& config);

template <typename Scalar>
void init_head(Parameters<Scalar>& params, int input_width, const std::vector<int>& hidden,
               int num_classes, std::mt19937_64& rng);

/// MLP head: hidden layers use leaky_relu, the last layer is linear.
template <typename Scalar>
Tensor<Scalar> classify(const Tensor<Scalar>& features, const Parameters<Scalar>& params);

/// Row-wise argmax; ties go to the smaller class id.
template <typename Scalar>
std::vector<Label> argmax_rows(const Matrix<Scalar>& logits);

}  // namespace sqn
