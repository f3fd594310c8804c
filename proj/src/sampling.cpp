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

#include "sqn/sampling.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "sqn/error.hpp"

namespace sqn {

namespace {

using CellKey = std::array<std::int64_t, 3>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

GridSampleResult grid_downsample(const PointCloud& cloud, double cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw ArgumentError("grid cell size must be positive, got " + std::to_string(cell_size));
  }
  cloud.validate();

  GridSampleResult result;
  result.cell_size = cell_size;
  std::unordered_map<CellKey, Index, CellKeyHash> cell_of;
  for (Index i = 0; i < cloud.size(); ++i) {
    CellKey key;
    for (int d = 0; d < 3; ++d) {
      key[d] = static_cast<std::int64_t>(std::floor(cloud.positions(i, d) / cell_size));
    }
    auto [it, inserted] = cell_of.try_emplace(key, static_cast<Index>(result.source_map.size()));
    if (inserted) result.source_map.emplace_back();
    result.source_map[it->second].push_back(i);
  }

  const auto m = static_cast<Index>(result.source_map.size());
  PointCloud& out = result.sampled;
  out.num_classes = cloud.num_classes;
  out.positions.resize(m, 3);
  if (cloud.colors) out.colors = Colors(m, 3);
  if (cloud.labels) out.labels = std::vector<Label>(m);

  for (Index c = 0; c < m; ++c) {
    const auto& members = result.source_map[c];
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (Index i : members) sum += cloud.positions.row(i).transpose().cast<double>();
    out.positions.row(c) = (sum / static_cast<double>(members.size())).cast<float>().transpose();

    if (cloud.colors) {
      const auto n = static_cast<std::uint64_t>(members.size());
      for (int d = 0; d < 3; ++d) {
        std::uint64_t s = 0;
        for (Index i : members) s += (*cloud.colors)(i, d);
        (*out.colors)(c, d) = static_cast<std::uint8_t>((2 * s + n) / (2 * n));
      }
    }
    if (cloud.labels) {
      std::map<Label, std::size_t> votes;
      for (Index i : members) ++votes[(*cloud.labels)[i]];
      Label best = votes.begin()->first;
      std::size_t best_count = 0;
      for (const auto& [label, count] : votes) {
        if (count > best_count) {
          best = label;
          best_count = count;
        }
      }
      (*out.labels)[c] = best;
    }
  }
  return result;
}

std::vector<Index> permutation_prefix(Index n, Index count, std::uint64_t seed) {
  if (count < 0 || count > n) {
    throw ArgumentError("cannot take " + std::to_string(count) + " of " + std::to_string(n) +
                        " indices");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `count` swaps do not depend on `count`,
  // so prefixes for the same seed are nested.
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(static_cast<std::size_t>(count));
  return perm;
}

RandomSampleResult random_downsample(const PointCloud& cloud, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ArgumentError("sampling ratio must be in (0, 1], got " + std::to_string(ratio));
  }
  const auto count = static_cast<Index>(std::llround(ratio * static_cast<double>(cloud.size())));
  if (count == 0) {
    throw ArgumentError("ratio " + std::to_string(ratio) + " of " + std::to_string(cloud.size()) +
                        " points selects nothing");
  }
  RandomSampleResult result;
  if (count == cloud.size() && ratio == 1.0) {
    result.index_map.resize(static_cast<std::size_t>(count));
    std::iota(result.index_map.begin(), result.index_map.end(), Index{0});
  } else {
    result.index_map = permutation_prefix(cloud.size(), count, seed);
  }
  result.sampled = select_points(cloud, result.index_map);
  return result;
}

}  // namespace sqn
