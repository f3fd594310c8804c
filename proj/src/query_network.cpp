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

#include "sqn/query_network.hpp"

#include <algorithm>
#include <cmath>

namespace sqn {

void QueryConfig::validate() const {
  if (k < 1) throw ArgumentError("query k must be at least 1");
  for (int w : head_widths) {
    if (w < 1) throw ArgumentError("head widths must be positive");
  }
  if (!(distance_power > 0.0)) throw ArgumentError("distance power must be positive");
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (std::none_of(levels.begin(), levels.end(), [](bool b) { return b; })) {
    throw ArgumentError("at least one level must be queried");
  }
}

int QueryConfig::feature_width(const std::array<int, kNumLevels>& level_dims) const {
  int w = 0;
  for (int l = 0; l < kNumLevels; ++l) {
    if (levels[l]) w += level_dims[l];
  }
  return w;
}

std::vector<double> interpolation_weights(std::span<const double> distances, const QueryConfig& config) {
  std::vector<double> w(distances.size(), 0.0);
  if (distances.empty()) return w;
  std::size_t coincident = 0;
  for (double d : distances) coincident += d < config.epsilon ? 1 : 0;
  if (coincident > 0) {
    const double share = 1.0 / static_cast<double>(coincident);
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (distances[i] < config.epsilon) w[i] = share;
    }
    return w;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    w[i] = 1.0 / (std::pow(distances[i], config.distance_power) + config.epsilon);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> interpolate(const Matrix<Scalar>& neighbor_features,
                                                     std::span<const double> distances,
                                                     const QueryConfig& config) {
  if (static_cast<Index>(distances.size()) != neighbor_features.rows() || distances.empty()) {
    throw ShapeError("interpolate: " + std::to_string(distances.size()) + " distances for " +
                     std::to_string(neighbor_features.rows()) + " neighbor rows");
  }
  const auto w = interpolation_weights(distances, config);
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(neighbor_features.cols());
  for (std::size_t k = 0; k < w.size(); ++k) {
    out += static_cast<Scalar>(w[k]) * neighbor_features.row(static_cast<Index>(k));
  }
  return out;
}

template <typename Scalar>
QueryResult<Scalar> query_features(const HierarchicalFeatures<Scalar>& hf, const Positions& queries,
                                   const QueryConfig& config) {
  config.validate();
  QueryResult<Scalar> result;
  const Index m = queries.rows();
  std::vector<Tensor<Scalar>> parts;
  for (int l = 0; l < kNumLevels; ++l) {
    if (!config.levels[l]) continue;
    const auto& level = hf.levels[l];
    if (!level.index) throw ArgumentError("level " + std::to_string(l + 1) + " has no spatial index");
    auto& lq = result.levels[l];
    lq.k = std::min<Index>(config.k, level.index->size());
    if (m == 0) {
      parts.push_back(Tensor<Scalar>::constant(Matrix<Scalar>(0, level.features.cols())));
      continue;
    }
    lq.indices = level.index->knn_batch(queries, lq.k, &lq.distances);
    lq.weights.resize(lq.distances.size());
    ColumnVector<Scalar> w(static_cast<Index>(lq.distances.size()));
    for (Index q = 0; q < m; ++q) {
      const auto wq = interpolation_weights(
          std::span<const double>(lq.distances).subspan(static_cast<std::size_t>(q * lq.k),
                                                        static_cast<std::size_t>(lq.k)),
          config);
      for (Index j = 0; j < lq.k; ++j) {
        lq.weights[q * lq.k + j] = wq[j];
        w[q * lq.k + j] = static_cast<Scalar>(wq[j]);
      }
    }
    parts.push_back(segment_sum(scale_rows(gather(level.features, lq.indices), std::move(w)), lq.k));
  }
  result.features = parts.size() == 1 ? parts.front() : concat(parts, 1);
  return result;
}

template <typename Scalar>
void init_head(Parameters<Scalar>& params, int input_width, const std::vector<int>& hidden,
               int num_classes, std::mt19937_64& rng) {
  if (num_classes < 1) throw ArgumentError("head needs at least one class");
  int in = input_width;
  std::size_t layer = 0;
  auto add_layer = [&](int out) {
    const std::string base = "head.fc" + std::to_string(layer++);
    params.add(base + ".w", glorot_uniform<Scalar>(in, out, rng));
    params.add(base + ".b", Matrix<Scalar>::Zero(1, out));
    in = out;
  };
  for (int w : hidden) add_layer(w);
  add_layer(num_classes);
}

template <typename Scalar>
Tensor<Scalar> classify(const Tensor<Scalar>& features, const Parameters<Scalar>& params) {
  std::size_t layers = 0;
  while (params.contains("head.fc" + std::to_string(layers) + ".w")) ++layers;
  if (layers == 0) throw ArgumentError("parameters contain no head layers");
  Tensor<Scalar> x = features;
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string base = "head.fc" + std::to_string(i);
    const auto& w = params.get(base + ".w");
    if (x.cols() != w.rows()) {
      throw ShapeError("classify: feature width " + std::to_string(x.cols()) +
                       " does not match head input " + std::to_string(w.rows()));
    }
    x = add_bias(matmul(x, w), params.get(base + ".b"));
    if (i + 1 < layers) x = leaky_relu(x, Scalar(kLeakySlope));
  }
  return x;
}

template <typename Scalar>
std::vector<Label> argmax_rows(const Matrix<Scalar>& logits) {
  std::vector<Label> out(static_cast<std::size_t>(logits.rows()));
  for (Index r = 0; r < logits.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<Label>(best);
  }
  return out;
}

#define SQN_INSTANTIATE_QUERY(S)                                                                  \
  template Eigen::Matrix<S, 1, Eigen::Dynamic> interpolate<S>(const Matrix<S>&,                   \
                                                              std::span<const double>,            \
                                                              const QueryConfig&);                \
  template QueryResult<S> query_features<S>(const HierarchicalFeatures<S>&, const Positions&,     \
                                            const QueryConfig&);                                  \
  template void init_head<S>(Parameters<S>&, int, const std::vector<int>&, int, std::mt19937_64&); \
  template Tensor<S> classify<S>(const Tensor<S>&, const Parameters<S>&);                         \
  template std::vector<Label> argmax_rows<S>(const Matrix<S>&);

SQN_INSTANTIATE_QUERY(float)
SQN_INSTANTIATE_QUERY(double)

#undef SQN_INSTANTIATE_QUERY

}  // namespace sqn
