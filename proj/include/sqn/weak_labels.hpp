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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sqn/point_cloud.hpp"

namespace sqn {

struct Model;

/// Sparse supervision: a sorted set of annotated point indices with their classes.
struct SparseLabelSet {
  std::vector<Index> indices;  ///< strictly increasing, each < num_points
  std::vector<Label> labels;   ///< aligned with indices
  Index num_points = 0;
  int num_classes = 0;
  double ratio = 0.0;  ///< indices.size() / num_points
  std::uint64_t seed = 0;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  void validate() const;
  bool operator==(const SparseLabelSet&) const = default;
};

/// round(ratio * N) points drawn uniformly without replacement: the sorted
/// prefix of a seeded permutation, so a larger ratio with the same seed
/// always yields a superset.
SparseLabelSet sample_sparse_labels(const PointCloud& cloud, double ratio, std::uint64_t seed);

/// Every point labeled with `labels` (used for dense or pseudo supervision).
SparseLabelSet dense_label_set(const std::vector<Label>& labels, int num_classes);

std::vector<std::size_t> label_histogram(const SparseLabelSet& labels, int num_classes);

/// w_c proportional to 1 / sqrt(count_c + 1), normalized to mean 1.
std::vector<double> class_weights(const SparseLabelSet& labels, int num_classes);

/// Dense labels predicted by `model`, with the annotated points kept at
/// their true classes.
std::vector<Label> generate_pseudo_labels(const Model& model, const PointCloud& cloud,
                                          const SparseLabelSet& annotated);
/// Overwrites `predicted` at the annotated indices.
std::vector<Label> merge_pseudo_labels(std::vector<Label> predicted, const SparseLabelSet& annotated);

// SQNL v1 text: header "SQNL 1 <N> <C> <ratio> <seed>", then "<index> <class>"
// lines in ascending index order.

std::string format_label_file(const SparseLabelSet& labels);
SparseLabelSet parse_label_file(std::string_view text, Index num_points, int num_classes);
void export_label_file(const SparseLabelSet& labels, const std::filesystem::path& path);
/// `num_points` / `num_classes` of 0 take the values from the header.
SparseLabelSet import_label_file(const std::filesystem::path& path, Index num_points = 0,
                                 int num_classes = 0);

// SQNP v1 text: header "SQNP 1 <count>", then one class id per line in the
// order of the queried positions.

std::string format_prediction_file(const std::vector<Label>& predicted);
std::vector<Label> parse_prediction_file(std::string_view text);

}  // namespace sqn
