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

#include "sqn/point_cloud.hpp"

#include <string>

#include "sqn/error.hpp"

namespace sqn {

void PointCloud::validate() const {
  const Index n = size();
  if (!positions.allFinite()) {
    throw ArgumentError("point cloud positions contain NaN or Inf");
  }
  if (colors && colors->rows() != n) {
    throw ArgumentError("color channel has " + std::to_string(colors->rows()) +
                        " rows, expected " + std::to_string(n));
  }
  if (labels) {
    if (static_cast<Index>(labels->size()) != n) {
      throw ArgumentError("label channel has " + std::to_string(labels->size()) +
                          " entries, expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < labels->size(); ++i) {
      if ((*labels)[i] >= num_classes) {
        throw ArgumentError("label " + std::to_string((*labels)[i]) + " at point " +
                            std::to_string(i) + " is not below num_classes " +
                            std::to_string(num_classes));
      }
    }
  }
}

PointCloud select_points(const PointCloud& cloud, std::span<const Index> indices) {
  PointCloud out;
  out.num_classes = cloud.num_classes;
  const auto m = static_cast<Index>(indices.size());
  out.positions.resize(m, 3);
  for (Index i = 0; i < m; ++i) out.positions.row(i) = cloud.positions.row(indices[i]);
  if (cloud.colors) {
    Colors c(m, 3);
    for (Index i = 0; i < m; ++i) c.row(i) = cloud.colors->row(indices[i]);
    out.colors = std::move(c);
  }
  if (cloud.labels) {
    std::vector<Label> l(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) l[i] = (*cloud.labels)[indices[i]];
    out.labels = std::move(l);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  // splitmix64 finalizer over a combined word
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ counter);
}

}  // namespace sqn
