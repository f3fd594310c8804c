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

#include "sqn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sqn/sampling.hpp"

namespace sqn {

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kBatchStream = 3;
constexpr std::uint64_t kSampleStream = 4;

struct StepBatch {
  PointCloud cloud;
  Positions queries;
  std::vector<Label> labels;
};

StepBatch prepare_step(const PointCloud& cloud, const SparseLabelSet& labels, const TrainConfig& config,
                       std::uint64_t step) {
  StepBatch batch;
  batch.cloud = augment(cloud, derive_seed(config.seed, kAugmentStream, step), config.augment);

  std::vector<Index> picks;
  const auto available = static_cast<Index>(labels.size());
  if (available <= config.queries_per_step) {
    picks.resize(labels.size());
    for (Index i = 0; i < available; ++i) picks[i] = i;
  } else {
    picks = permutation_prefix(available, config.queries_per_step,
                               derive_seed(config.seed, kBatchStream, step));
    std::sort(picks.begin(), picks.end());
  }
  batch.queries.resize(static_cast<Index>(picks.size()), 3);
  batch.labels.reserve(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) {
    batch.queries.row(static_cast<Index>(i)) = batch.cloud.positions.row(labels.indices[picks[i]]);
    batch.labels.push_back(labels.labels[picks[i]]);
  }
  return batch;
}

std::vector<double> loss_weights(const TrainConfig& config, const SparseLabelSet& labels,
                                 int num_classes) {
  if (!config.class_weighting) return std::vector<double>(static_cast<std::size_t>(num_classes), 1.0);
  return class_weights(labels, num_classes);
}

void check_inputs(const PointCloud& cloud, const SparseLabelSet& labels, int num_classes) {
  if (labels.empty()) throw ArgumentError("training needs at least one labeled point");
  if (labels.num_points != cloud.size()) {
    throw ArgumentError("label set is for " + std::to_string(labels.num_points) +
                        " points, cloud has " + std::to_string(cloud.size()));
  }
  labels.validate();
  if (labels.num_classes > num_classes) {
    throw ArgumentError("labels use " + std::to_string(labels.num_classes) +
                        " classes, model predicts " + std::to_string(num_classes));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ArgumentError("epochs must be non-negative");
  if (steps_per_epoch < 1) throw ArgumentError("steps_per_epoch must be positive");
  if (queries_per_step < 1) throw ArgumentError("queries_per_step must be positive");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ArgumentError("lr_decay must be in (0, 1]");
  if (augment.noise_sigma < 0.0 || augment.noise_clip < 0.0) {
    throw ArgumentError("noise magnitudes must be non-negative");
  }
}

PointCloud augment(const PointCloud& cloud, std::uint64_t seed, const AugmentOptions& options) {
  PointCloud out = cloud;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Draw every variate regardless of toggles so enabling one component does
  // not shift the others.
  const bool flip_x = unit(rng) < 0.5;
  const bool flip_y = unit(rng) < 0.5;
  const double angle = unit(rng) * 2.0 * std::numbers::pi;

  Eigen::Matrix3d transform = Eigen::Matrix3d::Identity();
  if (options.flip) {
    if (flip_x) transform(0, 0) = -1.0;
    if (flip_y) transform(1, 1) = -1.0;
  }
  if (options.rotate) {
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    rot(0, 0) = std::cos(angle);
    rot(0, 1) = -std::sin(angle);
    rot(1, 0) = std::sin(angle);
    rot(1, 1) = std::cos(angle);
    transform = rot * transform;
  }
  if (options.flip || options.rotate) {
    out.positions = (cloud.positions.cast<double>() * transform.transpose()).cast<float>();
  }
  if (options.noise && options.noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, options.noise_sigma);
    for (Index i = 0; i < out.size(); ++i) {
      for (int d = 0; d < 3; ++d) {
        const double e = std::clamp(gauss(rng), -options.noise_clip, options.noise_clip);
        out.positions(i, d) = static_cast<float>(out.positions(i, d) + e);
      }
    }
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> masked_loss(const Tensor<Scalar>& logits, std::span<const Label> query_labels,
                           std::span<const double> class_weights) {
  if (query_labels.empty()) throw ArgumentError("masked loss over an empty query batch");
  std::vector<int> ys(query_labels.begin(), query_labels.end());
  std::vector<Scalar> ws(class_weights.begin(), class_weights.end());
  return cross_entropy<Scalar>(logits, ys, ws);
}

template Tensor<float> masked_loss<float>(const Tensor<float>&, std::span<const Label>,
                                          std::span<const double>);
template Tensor<double> masked_loss<double>(const Tensor<double>&, std::span<const Label>,
                                            std::span<const double>);

std::vector<EpochLog> continue_training(Model& model, const PointCloud& cloud,
                                        const SparseLabelSet& labels, const TrainConfig& config,
                                        int epochs, const EpochCallback& on_epoch) {
  config.validate();
  check_inputs(cloud, labels, model.num_classes);
  const auto weights = loss_weights(config, labels, model.num_classes);
  const auto start = std::chrono::steady_clock::now();
  const int first_epoch = static_cast<int>(model.params.step / static_cast<std::uint64_t>(config.steps_per_epoch));

  std::vector<EpochLog> log;
  for (int e = 0; e < epochs; ++e) {
    const int epoch = first_epoch + e;
    AdamOptions adam;
    adam.learning_rate = config.learning_rate * std::pow(config.lr_decay, epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;
    for (int s = 0; s < config.steps_per_epoch; ++s) {
      const std::uint64_t step = model.params.step;
      const StepBatch batch = prepare_step(cloud, labels, config, step);
      const auto result = forward(model.params, model.encoder, model.query, batch.cloud,
                                  model.use_colors, batch.queries,
                                  derive_seed(config.seed, kSampleStream, step));
      const auto loss = masked_loss(result.logits, batch.labels, weights);
      backward(loss);
      adam_step(model.params, adam);

      loss_sum += loss.item();
      const auto predicted = argmax_rows(result.logits.value());
      for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == batch.labels[i];
      seen += predicted.size();
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / config.steps_per_epoch;
    entry.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.push_back(entry);
    if (on_epoch && !on_epoch(entry, model)) break;
  }
  return log;
}

double next_step_loss(const Model& model, const PointCloud& cloud, const SparseLabelSet& labels,
                      const TrainConfig& config) {
  check_inputs(cloud, labels, model.num_classes);
  NoGradGuard no_grad;
  const std::uint64_t step = model.params.step;
  const StepBatch batch = prepare_step(cloud, labels, config, step);
  const auto result = forward(model.params, model.encoder, model.query, batch.cloud, model.use_colors,
                              batch.queries, derive_seed(config.seed, kSampleStream, step));
  return masked_loss(result.logits, batch.labels, loss_weights(config, labels, model.num_classes))
      .item();
}

TrainResult train(const PointCloud& cloud, const SparseLabelSet& labels, const EncoderConfig& encoder,
                  const QueryConfig& query, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const int num_classes = std::max(cloud.num_classes, labels.num_classes);
  TrainResult result;
  result.model = init_model(encoder, query, num_classes, cloud.has_colors(),
                            derive_seed(config.seed, kInitStream));
  if (config.epochs > 0) {
    result.log = continue_training(result.model, cloud, labels, config, config.epochs, on_epoch);
  }
  return result;
}

bool should_retrain(const TrainConfig& config, const SparseLabelSet& labels) {
  switch (config.retrain) {
    case RetrainMode::On:
      return true;
    case RetrainMode::Off:
      return false;
    case RetrainMode::Auto:
      return labels.size() < kAutoRetrainThreshold;
  }
  return false;
}

TrainResult retrain_with_pseudo(const Model& model, const PointCloud& cloud,
                                const SparseLabelSet& labels, const EncoderConfig& encoder,
                                const QueryConfig& query, const TrainConfig& config) {
  const auto pseudo = generate_pseudo_labels(model, cloud, labels);
  return train(cloud, dense_label_set(pseudo, model.num_classes), encoder, query, config);
}

TrainResult train_weakly(const PointCloud& cloud, const SparseLabelSet& labels,
                         const EncoderConfig& encoder, const QueryConfig& query,
                         const TrainConfig& config) {
  TrainResult first = train(cloud, labels, encoder, query, config);
  if (!should_retrain(config, labels)) return first;
  TrainResult second = retrain_with_pseudo(first.model, cloud, labels, encoder, query, config);
  second.retrain_log = std::move(second.log);
  second.log = std::move(first.log);
  second.retrained = true;
  return second;
}

std::string format_train_log(const std::vector<EpochLog>& log) {
  std::string out = "epoch,loss,train_acc,seconds\n";
  char buf[128];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.3f\n", e.epoch, e.loss, e.train_acc, e.seconds);
    out += buf;
  }
  return out;
}

}  // namespace sqn
