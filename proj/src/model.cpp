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

#include "sqn/model.hpp"

#include <algorithm>

namespace sqn {

namespace {

constexpr Index kPredictBatch = 4096;

}  // namespace

Model init_model(const EncoderConfig& encoder, const QueryConfig& query, int num_classes,
                 bool use_colors, std::uint64_t seed) {
  encoder.validate();
  query.validate();
  Model model;
  model.encoder = encoder;
  model.query = query;
  model.num_classes = num_classes;
  model.use_colors = use_colors;
  std::mt19937_64 rng(derive_seed(seed, 0x494e4954));
  init_encoder(model.params, encoder, input_feature_width(use_colors), rng);
  init_head(model.params, query.feature_width(encoder.level_dims), query.head_widths, num_classes,
            rng);
  return model;
}

Model model_from_parameters(Parameters<float> params, const EncoderConfig& encoder,
                            const QueryConfig& query) {
  const auto& first = params.get("encoder.l1.pre.w");
  const int input_width = static_cast<int>(first.rows());
  if (input_width != input_feature_width(false) && input_width != input_feature_width(true)) {
    throw ArgumentError("checkpoint input width " + std::to_string(input_width) +
                        " matches neither the color nor the no-color encoder");
  }
  std::size_t layers = 0;
  while (params.contains("head.fc" + std::to_string(layers) + ".w")) ++layers;
  if (layers == 0) throw ArgumentError("checkpoint has no head layers");
  const auto& last = params.get("head.fc" + std::to_string(layers - 1) + ".w");

  Model model = init_model(encoder, query, static_cast<int>(last.cols()),
                           input_width == input_feature_width(true), 0);
  if (model.params.names() != params.names()) {
    throw ArgumentError("checkpoint parameter names do not match the configured model");
  }
  for (const auto& name : model.params.names()) {
    const auto& want = model.params.get(name);
    const auto& have = params.get(name);
    if (want.rows() != have.rows() || want.cols() != have.cols()) {
      throw ArgumentError("checkpoint parameter '" + name + "' is " + have.shape_string() +
                          ", configuration expects " + want.shape_string());
    }
  }
  model.params = std::move(params);
  return model;
}

template <typename Scalar>
QueryResult<Scalar> forward(const Parameters<Scalar>& params, const EncoderConfig& encoder,
                            const QueryConfig& query, const PointCloud& cloud, bool use_colors,
                            const Positions& queries, std::uint64_t sample_seed) {
  const auto input = Tensor<Scalar>::constant(input_features<Scalar>(cloud, use_colors));
  const auto hf = encode(cloud.positions, input, params, encoder, sample_seed);
  auto result = query_features(hf, queries, query);
  result.logits = classify(result.features, params);
  return result;
}

HierarchicalFeatures<float> encode_cloud(const Model& model, const PointCloud& cloud) {
  NoGradGuard no_grad;
  const auto input = Tensor<float>::constant(input_features<float>(cloud, model.use_colors));
  return encode(cloud.positions, input, model.params, model.encoder, model.encoder.seed);
}

Matrix<float> predict_logits(const Model& model, const HierarchicalFeatures<float>& hf,
                             const Positions& queries) {
  NoGradGuard no_grad;
  Matrix<float> logits(queries.rows(), model.num_classes);
  for (Index begin = 0; begin < queries.rows(); begin += kPredictBatch) {
    const Index count = std::min(kPredictBatch, queries.rows() - begin);
    const Positions batch = queries.middleRows(begin, count);
    const auto result = query_features(hf, batch, model.query);
    logits.middleRows(begin, count) = classify(result.features, model.params).value();
  }
  return logits;
}

std::vector<Label> predict(const Model& model, const PointCloud& cloud, const Positions& queries) {
  if (queries.rows() == 0) return {};
  const auto hf = encode_cloud(model, cloud);
  return argmax_rows(predict_logits(model, hf, queries));
}

std::vector<Label> predict(const Model& model, const PointCloud& cloud) {
  return predict(model, cloud, cloud.positions);
}

template QueryResult<float> forward<float>(const Parameters<float>&, const EncoderConfig&,
                                           const QueryConfig&, const PointCloud&, bool,
                                           const Positions&, std::uint64_t);
template QueryResult<double> forward<double>(const Parameters<double>&, const EncoderConfig&,
                                             const QueryConfig&, const PointCloud&, bool,
                                             const Positions&, std::uint64_t);

}  // namespace sqn
