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
#include <vector>

#include "sqn/point_cloud.hpp"

namespace sqn {

struct Neighbor {
  Index index = 0;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// Squared distance between single-precision points, accumulated in double.
inline double squared_distance(const Eigen::Ref<const Eigen::RowVector3f>& a,
                               const Eigen::Ref<const Eigen::RowVector3f>& b) {
  const double dx = static_cast<double>(a[0]) - static_cast<double>(b[0]);
  const double dy = static_cast<double>(a[1]) - static_cast<double>(b[1]);
  const double dz = static_cast<double>(a[2]) - static_cast<double>(b[2]);
  return dx * dx + dy * dy + dz * dz;
}

/// Exact k-d tree over a fixed set of positions.
///
/// Immutable once built; every query method is const and safe to call from
/// many threads at once. Results are exact Euclidean neighbors with ties
/// broken toward the smaller point index.
class SpatialIndex {
 public:
  explicit SpatialIndex(Positions positions);

  Index size() const { return points_.rows(); }
  const Positions& positions() const { return points_; }

  /// The k nearest points, ascending by (distance, index). 1 <= k <= size().
  std::vector<Neighbor> knn(const Eigen::RowVector3f& query, Index k) const;

  /// Indices of all points within distance r (inclusive), ascending by index.
  std::vector<Index> radius_neighbors(const Eigen::RowVector3f& query, double r) const;

  /// Row-major M x k neighbor indices for every row of `queries`, in input
  /// order. Distances go to `distances` when it is non-null.
  std::vector<Index> knn_batch(const Positions& queries, Index k,
                               std::vector<double>* distances = nullptr,
                               int threads = 1) const;

 private:
  struct Node {
    // Leaf when `split_dim < 0`; children are nodes, leaves span [begin, end) of order_.
    int split_dim = -1;
    float split_value = 0.0f;
    std::int32_t left = -1;
    std::int32_t right = -1;
    Index begin = 0;
    Index end = 0;
  };

  std::int32_t build(Index begin, Index end);
  template <typename Visitor>
  void search(std::int32_t node, const Eigen::RowVector3f& query, Visitor& visit) const;

  Positions points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
};

/// Convenience wrapper over the constructor. Throws on empty or non-finite input.
SpatialIndex build_index(const Positions& positions);

}  // namespace sqn
