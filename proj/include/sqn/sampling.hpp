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

#include "sqn/point_cloud.hpp"

namespace sqn {

struct GridSampleResult {
  PointCloud sampled;
  double cell_size = 0.0;
  /// source_map[i] lists the input indices that fell into output point i's cell.
  std::vector<std::vector<Index>> source_map;
};

/// Voxel-grid decimation with cells anchored at the origin
/// (cell = floor(x / cell_size) per axis).
///
/// Each occupied cell yields one point at the barycenter of its members;
/// labels take the cell's majority (ties go to the smaller class id) and
/// colors the per-channel mean rounded half-up. Output order follows the
/// first occurrence of each cell in the input.
GridSampleResult grid_downsample(const PointCloud& cloud, double cell_size);

struct RandomSampleResult {
  PointCloud sampled;
  std::vector<Index> index_map;  ///< source index of each output point
};

/// Uniform selection of round(ratio * N) distinct points without
/// replacement. The selection is a prefix of a seeded permutation, so the
/// output order is the permutation order.
RandomSampleResult random_downsample(const PointCloud& cloud, double ratio, std::uint64_t seed);

/// The first `count` entries of a seeded uniform permutation of 0..n-1.
std::vector<Index> permutation_prefix(Index n, Index count, std::uint64_t seed);

}  // namespace sqn
