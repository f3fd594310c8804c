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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqn/model.hpp"
#include "sqn/weak_labels.hpp"

namespace sqn {

enum class RetrainMode { Auto, On, Off };

/// Labeled-point count below which RetrainMode::Auto runs the pseudo-label stage.
inline constexpr std::size_t kAutoRetrainThreshold = 500;

struct AugmentOptions {
  bool flip = true;
  bool rotate = true;
  bool noise = true;
  double noise_sigma = 0.005;  ///< meters
  double noise_clip = 0.02;    ///< meters
};

struct TrainConfig {
  int epochs = 200;
  int steps_per_epoch = 1;
  /// Labeled points queried per step; all of them when fewer are available.
  int queries_per_step = 256;
  double learning_rate = 0.01;
  /// Multiplicative learning-rate decay applied once per epoch.
  double lr_decay = 0.95;
  AugmentOptions augment;
  std::uint64_t seed = 0;
  RetrainMode retrain = RetrainMode::Auto;
  bool class_weighting = true;

  void validate() const;
};

/// Random flip of x and y (each with probability 1/2), rotation about the
/// vertical axis by an angle uniform in [0, 2pi), then clipped Gaussian
/// position noise. Labels and colors are untouched.
PointCloud augment(const PointCloud& cloud, std::uint64_t seed, const AugmentOptions& options = {});

/// Mean over queries of class_weight[y] * -log softmax(logits)[y].
template <typename Scalar>
Tensor<Scalar> masked_loss(const Tensor<Scalar>& logits, std::span<const Label> query_labels,
                           std::span<const double> class_weights);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  /// Log of the pseudo-label stage when it ran.
  std::vector<EpochLog> retrain_log;
  bool retrained = false;
};

/// Called after every epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochLog&, const Model&)>;

/// Fresh model trained against `labels` (single stage, no pseudo labels).
TrainResult train(const PointCloud& cloud, const SparseLabelSet& labels, const EncoderConfig& encoder,
                  const QueryConfig& query, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Continues optimizing `model` for `epochs` more epochs. The step counter
/// stored in the parameters keys every random stream, so a model reloaded
/// from a checkpoint resumes the same sequence of batches and augmentations.
std::vector<EpochLog> continue_training(Model& model, const PointCloud& cloud,
                                        const SparseLabelSet& labels, const TrainConfig& config,
                                        int epochs, const EpochCallback& on_epoch = {});

/// Loss of the step the model would take next, without updating it.
double next_step_loss(const Model& model, const PointCloud& cloud, const SparseLabelSet& labels,
                      const TrainConfig& config);

/// Pseudo-label the whole cloud with `model` (annotated points keep their
/// true classes) and train a new model from scratch on the result.
TrainResult retrain_with_pseudo(const Model& model, const PointCloud& cloud,
                                const SparseLabelSet& labels, const EncoderConfig& encoder,
                                const QueryConfig& query, const TrainConfig& config);

/// `train`, followed by `retrain_with_pseudo` when the retrain mode asks for it.
TrainResult train_weakly(const PointCloud& cloud, const SparseLabelSet& labels,
                         const EncoderConfig& encoder, const QueryConfig& query,
                         const TrainConfig& config);

bool should_retrain(const TrainConfig& config, const SparseLabelSet& labels);

/// CSV "epoch,loss,train_acc,seconds".
std::string format_train_log(const std::vector<EpochLog>& log);

/// Everything a run needs, read from a flat key=value file.
struct RunConfig {
  EncoderConfig encoder;
  QueryConfig query;
  TrainConfig train;
};

/// Unknown keys and malformed values are errors naming the line.
RunConfig parse_run_config(std::string_view text);
std::string format_run_config(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

}  // namespace sqn
