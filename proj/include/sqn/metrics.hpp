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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqn/point_cloud.hpp"

namespace sqn {

struct Model;

/// C x C counts; entry (g, p) counts points of true class g predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  int num_classes() const { return num_classes_; }
  std::uint64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
  std::uint64_t total() const;

  void add(int truth, int predicted, std::uint64_t count = 1);
  /// Entrywise sum, for merging shards.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

  std::uint64_t true_positives(int c) const { return at(c, c); }
  std::uint64_t false_positives(int c) const;
  std::uint64_t false_negatives(int c) const;

 private:
  std::size_t index(int truth, int predicted) const;
  int num_classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix accumulate(std::span<const Label> truth, std::span<const Label> predicted,
                           int num_classes);
// Exact-match overload so unqualified calls on vectors do not resolve to
// std::accumulate through argument-dependent lookup.
ConfusionMatrix accumulate(const std::vector<Label>& truth, const std::vector<Label>& predicted,
                           int num_classes);

/// trace / total.
double oa(const ConfusionMatrix& cm);
/// Mean recall over classes present in the ground truth.
double macc(const ConfusionMatrix& cm);
/// TP / (TP + FP + FN) per class; nullopt where the union is empty.
std::vector<std::optional<double>> per_class_iou(const ConfusionMatrix& cm);
/// Mean IoU over the classes with a non-empty union.
double miou(const ConfusionMatrix& cm);

/// True for points with at least one different-class ground-truth neighbor
/// within `radius`.
std::vector<bool> boundary_mask(const PointCloud& cloud, double radius);

struct MetricRow {
  std::string metric;
  std::optional<int> cls;
  double value = 0.0;
  bool operator==(const MetricRow&) const = default;
};

/// Flat metric table: overall oa/macc/miou and per-class iou, plus the same
/// on boundary and interior subsets for each requested radius. Boundary rows
/// are named like "boundary_miou@0.1".
struct EvalReport {
  std::vector<MetricRow> rows;

  std::optional<double> find(std::string_view metric, std::optional<int> cls = std::nullopt) const;
  /// CSV with header "metric,class,value"; class is empty for overall metrics.
  std::string to_csv() const;
  static EvalReport from_csv(std::string_view text);
  bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate_predictions(const PointCloud& cloud, std::span<const Label> predicted,
                                std::span<const double> boundary_radii);
EvalReport eval_report(const Model& model, const PointCloud& cloud,
                       std::span<const double> boundary_radii);

std::string format_radius(double radius);

}  // namespace sqn
