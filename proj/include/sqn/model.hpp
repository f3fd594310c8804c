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

#include <cstdint>
#include <vector>

#include "sqn/query_network.hpp"

namespace sqn {

/// Encoder + query head parameters together with the configuration that
/// shapes them.
struct Model {
  EncoderConfig encoder;
  QueryConfig query;
  int num_classes = 0;
  bool use_colors = false;
  Parameters<float> params;
};

/// Fresh parameters: encoder blocks then head, all from one seeded stream.
Model init_model(const EncoderConfig& encoder, const QueryConfig& query, int num_classes,
                 bool use_colors, std::uint64_t seed);

/// Rebuilds a model around loaded parameters, checking that every expected
/// tensor exists with the expected shape.
Model model_from_parameters(Parameters<float> params, const EncoderConfig& encoder,
                            const QueryConfig& query);

/// Forward pass of encoder + head for arbitrary positions, in float.
template <typename Scalar>
QueryResult<Scalar> forward(const Parameters<Scalar>& params, const EncoderConfig& encoder,
                            const QueryConfig& query, const PointCloud& cloud, bool use_colors,
                            const Positions& queries, std::uint64_t sample_seed);

/// Inference-time encoding of `cloud` (no graph recorded).
HierarchicalFeatures<float> encode_cloud(const Model& model, const PointCloud& cloud);

/// Logits for arbitrary positions against an already encoded cloud.
Matrix<float> predict_logits(const Model& model, const HierarchicalFeatures<float>& hf,
                             const Positions& queries);

/// Class ids for arbitrary positions, which need not belong to `cloud`.
std::vector<Label> predict(const Model& model, const PointCloud& cloud, const Positions& queries);
/// Class ids for every point of `cloud`.
std::vector<Label> predict(const Model& model, const PointCloud& cloud);

}  // namespace sqn
