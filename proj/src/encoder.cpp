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

#include "sqn/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "sqn/sampling.hpp"

namespace sqn {

void EncoderConfig::validate() const {
  for (int l = 0; l < kNumLevels; ++l) {
    if (level_dims[l] < 1) {
      throw ArgumentError("encoder level " + std::to_string(l + 1) + " width must be positive");
    }
    if (decimation[l] < 2) {
      throw ArgumentError("encoder level " + std::to_string(l + 1) +
                          " decimation must be at least 2 so level sizes strictly decrease");
    }
  }
  if (neighbors < 1) throw ArgumentError("encoder neighbor count must be positive");
}

std::array<Index, kNumLevels> EncoderConfig::level_sizes(Index n) const {
  validate();
  std::array<Index, kNumLevels> sizes{};
  Index current = n;
  for (int l = 0; l < kNumLevels; ++l) {
    if (current < decimation[l]) {
      throw ArgumentError("cloud of " + std::to_string(n) +
                          " points is too small for the decimation schedule (level " +
                          std::to_string(l + 1) + " input has " + std::to_string(current) +
                          " points, decimation " + std::to_string(decimation[l]) + ")");
    }
    current = (current + decimation[l] - 1) / decimation[l];
    sizes[l] = current;
  }
  return sizes;
}

int input_feature_width(bool with_colors) { return with_colors ? 7 : 4; }

template <typename Scalar>
Matrix<Scalar> input_features(const PointCloud& cloud, bool with_colors) {
  if (with_colors && !cloud.colors) throw ArgumentError("model expects colors, cloud has none");
  const Index n = cloud.size();
  Matrix<Scalar> x(n, input_feature_width(with_colors));
  x.leftCols(3) = cloud.positions.cast<Scalar>();
  if (with_colors) x.middleCols(3, 3) = cloud.colors->cast<Scalar>() / Scalar(255);
  x.col(x.cols() - 1).setOnes();
  return x;
}

Matrix<double> relative_position_code(const Eigen::RowVector3f& center, const Positions& neighbors) {
  Matrix<double> code(neighbors.rows(), kRelativeCodeWidth);
  const Eigen::RowVector3d c = center.cast<double>();
  for (Index j = 0; j < neighbors.rows(); ++j) {
    const Eigen::RowVector3d p = neighbors.row(j).cast<double>();
    code.block<1, 3>(j, 0) = c;
    code.block<1, 3>(j, 3) = p;
    code.block<1, 3>(j, 6) = c - p;
    code(j, 9) = std::sqrt(squared_distance(center, neighbors.row(j)));
  }
  return code;
}

template <typename Scalar>
Matrix<Scalar> relative_position_codes(const Positions& positions, std::span<const Index> neighbors,
                                       Index k) {
  const Index n = positions.rows();
  if (static_cast<Index>(neighbors.size()) != n * k) {
    throw ShapeError("neighbor table has " + std::to_string(neighbors.size()) + " entries for " +
                     std::to_string(n) + " points x k=" + std::to_string(k));
  }
  Matrix<Scalar> code(n * k, kRelativeCodeWidth);
  for (Index i = 0; i < n; ++i) {
    const Eigen::RowVector3f center = positions.row(i);
    const Eigen::Matrix<Scalar, 1, 3> c = center.cast<Scalar>();
    for (Index j = 0; j < k; ++j) {
      const Index row = i * k + j;
      const Index nb = neighbors[row];
      const Eigen::Matrix<Scalar, 1, 3> p = positions.row(nb).cast<Scalar>();
      code.template block<1, 3>(row, 0) = c;
      code.template block<1, 3>(row, 3) = p;
      code.template block<1, 3>(row, 6) = c - p;
      code(row, 9) = static_cast<Scalar>(std::sqrt(squared_distance(center, positions.row(nb))));
    }
  }
  return code;
}

template <typename Scalar>
Tensor<Scalar> relative_position_encoding(const Tensor<Scalar>& raw_code, const Tensor<Scalar>& weight,
                                          const Tensor<Scalar>& bias) {
  return leaky_relu(add_bias(matmul(raw_code, weight), bias), Scalar(kLeakySlope));
}

template <typename Scalar>
Tensor<Scalar> attentive_pooling(const Tensor<Scalar>& neighbor_features, const Tensor<Scalar>& gate,
                                 Index k) {
  const Tensor<Scalar> scores = segment_softmax(matmul(neighbor_features, gate), k);
  return segment_sum(mul(scores, neighbor_features), k);
}

template <typename Scalar>
void init_lfa_block(Parameters<Scalar>& params, const std::string& prefix, int in_dim, int out_dim,
                    std::mt19937_64& rng) {
  const int half = std::max(1, out_dim / 2);
  auto dense = [&](const std::string& name, int fan_in, int fan_out, bool with_bias) {
    params.add(prefix + "." + name + ".w", glorot_uniform<Scalar>(fan_in, fan_out, rng));
    if (with_bias) params.add(prefix + "." + name + ".b", Matrix<Scalar>::Zero(1, fan_out));
  };
  dense("pre", in_dim, half, true);
  dense("unit1.locse", kRelativeCodeWidth, half, true);
  dense("unit1.gate", 2 * half, 2 * half, false);
  dense("unit1.mlp", 2 * half, half, true);
  dense("unit2.locse", kRelativeCodeWidth, half, true);
  dense("unit2.gate", 2 * half, 2 * half, false);
  dense("unit2.mlp", 2 * half, out_dim, true);
  dense("skip", in_dim, out_dim, true);
}

template <typename Scalar>
Tensor<Scalar> lfa_block(const Positions& positions, const Tensor<Scalar>& features,
                         std::span<const Index> neighbors, Index k, const Parameters<Scalar>& params,
                         const std::string& prefix) {
  if (features.rows() != positions.rows()) {
    throw ShapeError("lfa_block: " + std::to_string(positions.rows()) + " positions but features " +
                     features.shape_string());
  }
  const Scalar slope(kLeakySlope);
  auto p = [&](const char* name) -> const Tensor<Scalar>& { return params.get(prefix + "." + name); };
  auto dense = [&](const Tensor<Scalar>& x, const char* name) {
    const std::string base = prefix + "." + name;
    return add_bias(matmul(x, params.get(base + ".w")), params.get(base + ".b"));
  };

  const auto raw = Tensor<Scalar>::constant(relative_position_codes<Scalar>(positions, neighbors, k));
  const Tensor<Scalar> pre = leaky_relu(dense(features, "pre"), slope);

  const Tensor<Scalar> enc1 = relative_position_encoding(raw, p("unit1.locse.w"), p("unit1.locse.b"));
  const Tensor<Scalar> pooled1 =
      attentive_pooling(concat<Scalar>({enc1, gather(pre, neighbors)}, 1), p("unit1.gate.w"), k);
  const Tensor<Scalar> agg1 = leaky_relu(dense(pooled1, "unit1.mlp"), slope);

  const Tensor<Scalar> enc2 = relative_position_encoding(raw, p("unit2.locse.w"), p("unit2.locse.b"));
  const Tensor<Scalar> pooled2 =
      attentive_pooling(concat<Scalar>({enc2, gather(agg1, neighbors)}, 1), p("unit2.gate.w"), k);
  const Tensor<Scalar> agg2 = dense(pooled2, "unit2.mlp");

  return leaky_relu(add(agg2, dense(features, "skip")), slope);
}

std::vector<Index> random_sample_indices(Index n, int ratio, std::uint64_t seed) {
  if (ratio < 1) throw ArgumentError("decimation ratio must be at least 1");
  const Index keep = (n + ratio - 1) / ratio;
  if (keep == 0) throw ArgumentError("random sampling of an empty level");
  std::vector<Index> kept = permutation_prefix(n, keep, seed);
  std::sort(kept.begin(), kept.end());
  return kept;
}

template <typename Scalar>
SampledLevel<Scalar> random_sample_level(const Positions& positions, const Tensor<Scalar>& features,
                                         int ratio, std::uint64_t seed) {
  SampledLevel<Scalar> out;
  out.kept = random_sample_indices(positions.rows(), ratio, seed);
  out.positions.resize(static_cast<Index>(out.kept.size()), 3);
  for (std::size_t i = 0; i < out.kept.size(); ++i) {
    out.positions.row(static_cast<Index>(i)) = positions.row(out.kept[i]);
  }
  out.features = gather(features, out.kept);
  return out;
}

template <typename Scalar>
void init_encoder(Parameters<Scalar>& params, const EncoderConfig& config, int input_width,
                  std::mt19937_64& rng) {
  config.validate();
  int in_dim = input_width;
  for (int l = 0; l < kNumLevels; ++l) {
    init_lfa_block(params, "encoder.l" + std::to_string(l + 1), in_dim, config.level_dims[l], rng);
    in_dim = config.level_dims[l];
  }
}

template <typename Scalar>
HierarchicalFeatures<Scalar> encode(const Positions& positions, const Tensor<Scalar>& input,
                                    const Parameters<Scalar>& params, const EncoderConfig& config,
                                    std::uint64_t sample_seed) {
  config.level_sizes(positions.rows());  // validates the schedule
  if (input.rows() != positions.rows()) {
    throw ShapeError("encode: " + std::to_string(positions.rows()) + " positions but input " +
                     input.shape_string());
  }
  HierarchicalFeatures<Scalar> hf;
  Positions current_positions = positions;
  Tensor<Scalar> current = input;
  std::vector<Index> source(static_cast<std::size_t>(positions.rows()));
  for (std::size_t i = 0; i < source.size(); ++i) source[i] = static_cast<Index>(i);

  auto index = std::make_shared<const SpatialIndex>(current_positions);
  for (int l = 0; l < kNumLevels; ++l) {
    const Index k = std::min<Index>(config.neighbors, current_positions.rows());
    const std::vector<Index> neighbors = index->knn_batch(current_positions, k);
    const Tensor<Scalar> block = lfa_block(current_positions, current, neighbors, k, params,
                                           "encoder.l" + std::to_string(l + 1));
    auto sampled = random_sample_level(current_positions, block, config.decimation[l],
                                       derive_seed(sample_seed, 0x5253, static_cast<std::uint64_t>(l)));
    auto& level = hf.levels[l];
    level.positions = std::move(sampled.positions);
    level.features = std::move(sampled.features);
    level.kept = std::move(sampled.kept);
    level.source.resize(level.kept.size());
    for (std::size_t i = 0; i < level.kept.size(); ++i) level.source[i] = source[level.kept[i]];
    level.index = std::make_shared<const SpatialIndex>(level.positions);

    current_positions = level.positions;
    current = level.features;
    source = level.source;
    index = level.index;
  }
  return hf;
}

#define SQN_INSTANTIATE_ENCODER(S)                                                              \
  template Matrix<S> input_features<S>(const PointCloud&, bool);                                \
  template Matrix<S> relative_position_codes<S>(const Positions&, std::span<const Index>, Index); \
  template Tensor<S> relative_position_encoding<S>(const Tensor<S>&, const Tensor<S>&,          \
                                                   const Tensor<S>&);                           \
  template Tensor<S> attentive_pooling<S>(const Tensor<S>&, const Tensor<S>&, Index);           \
  template void init_lfa_block<S>(Parameters<S>&, const std::string&, int, int, std::mt19937_64&); \
  template Tensor<S> lfa_block<S>(const Positions&, const Tensor<S>&, std::span<const Index>,   \
                                  Index, const Parameters<S>&, const std::string&);             \
  template SampledLevel<S> random_sample_level<S>(const Positions&, const Tensor<S>&, int,      \
                                                  std::uint64_t);                               \
  template void init_encoder<S>(Parameters<S>&, const EncoderConfig&, int, std::mt19937_64&);   \
  template HierarchicalFeatures<S> encode<S>(const Positions&, const Tensor<S>&,                \
                                             const Parameters<S>&, const EncoderConfig&,        \
                                             std::uint64_t);

SQN_INSTANTIATE_ENCODER(float)
SQN_INSTANTIATE_ENCODER(double)

#undef SQN_INSTANTIATE_ENCODER

}  // namespace sqn
