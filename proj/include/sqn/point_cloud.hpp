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

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sqn {

using Index = Eigen::Index;
using Label = std::uint16_t;

/// N x 3 row-major positions in meters, stored in single precision.
using Positions = Eigen::Matrix<float, Eigen::Dynamic, 3, Eigen::RowMajor>;
/// N x 3 row-major RGB triples.
using Colors = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// A point cloud with optional per-point colors and ground-truth labels.
///
/// Optional channels, when present, have exactly `size()` rows; labels are
/// all `< num_classes`. Call `validate()` after building one by hand.
struct PointCloud {
  Positions positions;
  std::optional<Colors> colors;
  std::optional<std::vector<Label>> labels;
  int num_classes = 0;

  Index size() const { return positions.rows(); }
  bool has_colors() const { return colors.has_value(); }
  bool has_labels() const { return labels.has_value(); }

  /// Throws ArgumentError on any broken invariant.
  void validate() const;
};

/// Rows of `cloud` picked by `indices`, in that order, with every present
/// channel carried along.
PointCloud select_points(const PointCloud& cloud, std::span<const Index> indices);

/// Independent 64-bit seed for stream `stream` of a seed bundle.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter = 0);

}  // namespace sqn
