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
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sqn/parameters.hpp"
#include "sqn/point_cloud.hpp"
#include "sqn/spatial_index.hpp"
#include "sqn/tensor_ops.hpp"

namespace sqn {

inline constexpr int kNumLevels = 4;
/// Width of the raw relative-position code (p_i, p_k, p_i - p_k, |p_i - p_k|).
inline constexpr int kRelativeCodeWidth = 10;
inline constexpr double kLeakySlope = 0.2;

struct EncoderConfig {
  std::array<int, kNumLevels> level_dims{8, 16, 32, 64};
  /// Decimation factor applied by the random sampling after each block.
  std::array<int, kNumLevels> decimation{4, 4, 4, 4};
  int neighbors = 16;
  /// Seed of the random sampling used at inference time.
  std::uint64_t seed = 0;

  /// Full-width configuration (32/128/256/512).
  static EncoderConfig paper_widths() {
    EncoderConfig c;
    c.level_dims = {32, 128, 256, 512};
    return c;
  }
  void validate() const;
  /// Point counts per level for an N-point input; throws when the schedule
  /// does not fit.
  std::array<Index, kNumLevels> level_sizes(Index n) const;
};

/// Per-point input features: (x, y, z[, r/255, g/255, b/255], 1).
int input_feature_width(bool with_colors);
template <typename Scalar>
Matrix<Scalar> input_features(const PointCloud& cloud, bool with_colors);

template <typename Scalar>
struct FeatureLevel {
  Positions positions;
  Tensor<Scalar> features;
  /// Row of the previous level (or of the input cloud for level 1) each row came from.
  std::vector<Index> kept;
  /// Index into the input cloud of each row.
  std::vector<Index> source;
  std::shared_ptr<const SpatialIndex> index;
};

template <typename Scalar>
struct HierarchicalFeatures {
  std::array<FeatureLevel<Scalar>, kNumLevels> levels;
};

/// Raw relative-position code for one center and its K neighbors: K x 10
/// rows of (p_i, p_k, p_i - p_k, |p_i - p_k|).
Matrix<double> relative_position_code(const Eigen::RowVector3f& center, const Positions& neighbors);

/// The same code for every (point, neighbor) pair of a flattened N x K
/// neighbor table; row i*K + j pairs point i with its j-th neighbor.
template <typename Scalar>
Matrix<Scalar> relative_position_codes(const Positions& positions, std::span<const Index> neighbors,
                                       Index k);

/// Shared one-layer MLP on the raw code: leaky_relu(code * W + b).
template <typename Scalar>
Tensor<Scalar> relative_position_encoding(const Tensor<Scalar>& raw_code, const Tensor<Scalar>& weight,
                                          const Tensor<Scalar>& bias);

/// Learned-gate attention over groups of K consecutive neighbor rows:
/// scores = softmax_K(features * gate), output = sum_K scores * features.
template <typename Scalar>
Tensor<Scalar> attentive_pooling(const Tensor<Scalar>& neighbor_features, const Tensor<Scalar>& gate,
                                 Index k);

/// Parameter shapes of one local feature aggregation block under `prefix`.
template <typename Scalar>
void init_lfa_block(Parameters<Scalar>& params, const std::string& prefix, int in_dim, int out_dim,
                    std::mt19937_64& rng);

/// Dilated residual block: two (relative position encoding, attentive
/// pooling) units over the same neighborhoods plus a learned skip.
/// `neighbors` is the flattened N x k neighbor table. Row count is preserved.
template <typename Scalar>
Tensor<Scalar> lfa_block(const Positions& positions, const Tensor<Scalar>& features,
                         std::span<const Index> neighbors, Index k, const Parameters<Scalar>& params,
                         const std::string& prefix);

/// ceil(n / ratio) distinct rows chosen uniformly, returned ascending.
std::vector<Index> random_sample_indices(Index n, int ratio, std::uint64_t seed);

template <typename Scalar>
struct SampledLevel {
  Positions positions;
  Tensor<Scalar> features;
  std::vector<Index> kept;
};

template <typename Scalar>
SampledLevel<Scalar> random_sample_level(const Positions& positions, const Tensor<Scalar>& features,
                                         int ratio, std::uint64_t seed);

template <typename Scalar>
void init_encoder(Parameters<Scalar>& params, const EncoderConfig& config, int input_width,
                  std::mt19937_64& rng);

/// Runs the four blocks. `sample_seed` drives the random sampling of every
/// level; pass `config.seed` for inference.
template <typename Scalar>
HierarchicalFeatures<Scalar> encode(const Positions& positions, const Tensor<Scalar>& input,
                                    const Parameters<Scalar>& params, const EncoderConfig& config,
                                    std::uint64_t sample_seed);

}  // namespace sqn
