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

#include "sqn/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <thread>

#include "sqn/error.hpp"

namespace sqn {

namespace {

constexpr Index kLeafSize = 12;

class KnnCollector {
 public:
  explicit KnnCollector(Index k) : k_(static_cast<std::size_t>(k)) {}

  double bound() const {
    return heap_.size() < k_ ? std::numeric_limits<double>::infinity() : heap_.top().first;
  }
  void visit(Index i, double d2) {
    if (heap_.size() < k_) {
      heap_.emplace(d2, i);
    } else if (std::pair(d2, i) < heap_.top()) {
      heap_.pop();
      heap_.emplace(d2, i);
    }
  }
  std::vector<Neighbor> take() {
    std::vector<Neighbor> out(heap_.size());
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
      *it = {heap_.top().second, std::sqrt(heap_.top().first)};
      heap_.pop();
    }
    return out;
  }

 private:
  std::size_t k_;
  // max-heap on (squared distance, index)
  std::priority_queue<std::pair<double, Index>> heap_;
};

class RadiusCollector {
 public:
  explicit RadiusCollector(double r) : r2_(r * r) {}
  double bound() const { return r2_; }
  void visit(Index i, double d2) {
    if (d2 <= r2_) hits.push_back(i);
  }
  std::vector<Index> hits;

 private:
  double r2_;
};

}  // namespace

SpatialIndex::SpatialIndex(Positions positions) : points_(std::move(positions)) {
  if (points_.rows() == 0) throw ArgumentError("cannot build a spatial index over zero points");
  if (!points_.allFinite()) throw ArgumentError("spatial index positions must be finite");
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * points_.rows() / kLeafSize + 2));
  build(0, points_.rows());
}

std::int32_t SpatialIndex::build(Index begin, Index end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  Eigen::RowVector3f lo = points_.row(order_[begin]);
  Eigen::RowVector3f hi = lo;
  for (Index i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_.row(order_[i]));
    hi = hi.cwiseMax(points_.row(order_[i]));
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  if (hi[dim] == lo[dim]) return id;  // all points coincide; keep as a fat leaf

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) { return points_(a, dim) < points_(b, dim); });
  const float split = points_(order_[mid], dim);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].split_dim = dim;
  nodes_[id].split_value = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Visitor>
void SpatialIndex::search(std::int32_t node_id, const Eigen::RowVector3f& query,
                          Visitor& visit) const {
  const Node& node = nodes_[node_id];
  if (node.split_dim < 0) {
    for (Index i = node.begin; i < node.end; ++i) {
      const Index p = order_[i];
      visit.visit(p, squared_distance(points_.row(p), query));
    }
    return;
  }
  // Left subtree coordinates are <= split, right subtree >= split.
  const double diff =
      static_cast<double>(query[node.split_dim]) - static_cast<double>(node.split_value);
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, query, visit);
  if (diff * diff <= visit.bound()) search(far, query, visit);
}

std::vector<Neighbor> SpatialIndex::knn(const Eigen::RowVector3f& query, Index k) const {
  if (k < 1 || k > size()) {
    throw ArgumentError("knn k=" + std::to_string(k) + " outside [1, " + std::to_string(size()) + "]");
  }
  KnnCollector collector(k);
  search(0, query, collector);
  return collector.take();
}

std::vector<Index> SpatialIndex::radius_neighbors(const Eigen::RowVector3f& query, double r) const {
  if (!(r > 0.0)) throw ArgumentError("radius must be positive, got " + std::to_string(r));
  RadiusCollector collector(r);
  search(0, query, collector);
  std::sort(collector.hits.begin(), collector.hits.end());
  return std::move(collector.hits);
}

std::vector<Index> SpatialIndex::knn_batch(const Positions& queries, Index k,
                                           std::vector<double>* distances, int threads) const {
  if (k < 1 || k > size()) {
    throw ArgumentError("knn k=" + std::to_string(k) + " outside [1, " + std::to_string(size()) + "]");
  }
  const Index m = queries.rows();
  std::vector<Index> out(static_cast<std::size_t>(m * k));
  if (distances) distances->assign(static_cast<std::size_t>(m * k), 0.0);

  auto work = [&](Index begin, Index end) {
    for (Index q = begin; q < end; ++q) {
      KnnCollector collector(k);
      const Eigen::RowVector3f query = queries.row(q);
      search(0, query, collector);
      const auto result = collector.take();
      for (Index j = 0; j < k; ++j) {
        out[q * k + j] = result[j].index;
        if (distances) (*distances)[q * k + j] = result[j].distance;
      }
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || m < 1024) {
    work(0, m);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    const Index chunk = (m + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const Index begin = t * chunk;
      const Index end = std::min(m, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  return out;
}

SpatialIndex build_index(const Positions& positions) { return SpatialIndex(positions); }

}  // namespace sqn
