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

#include "sqn/scene.hpp"

#include <gtest/gtest.h>

#include "sqn/error.hpp"

namespace sqn {
namespace {

std::vector<Index> class_counts(const PointCloud& c) {
  std::vector<Index> counts(static_cast<std::size_t>(c.num_classes), 0);
  for (Label l : *c.labels) ++counts[l];
  return counts;
}

TEST(Scene, DefaultRoomCountsAndBounds) {
  SceneSpec spec;
  const auto cloud = synth_scene(spec);
  EXPECT_EQ(cloud.size(), spec.total_points());
  EXPECT_EQ(cloud.num_classes, 4);
  EXPECT_EQ(class_counts(cloud), spec.points_per_class);
  EXPECT_NO_THROW(cloud.validate());
  const double half = spec.extent / 2 + 0.05;
  EXPECT_LE(cloud.positions.col(0).cwiseAbs().maxCoeff(), half);
  EXPECT_LE(cloud.positions.col(1).cwiseAbs().maxCoeff(), half);
  EXPECT_GE(cloud.positions.col(2).minCoeff(), -0.05f);
  EXPECT_LE(cloud.positions.col(2).maxCoeff(), spec.wall_height + 0.05);
}

TEST(Scene, FloorIsFlatAndSpheresRest) {
  SceneSpec spec;
  spec.jitter = 0.0;
  const auto cloud = synth_scene(spec);
  for (Index i = 0; i < cloud.size(); ++i) {
    if ((*cloud.labels)[i] == 0) EXPECT_EQ(cloud.positions(i, 2), 0.f);
    if ((*cloud.labels)[i] == 3) EXPECT_GE(cloud.positions(i, 2), -1e-5f);
  }
}

TEST(Scene, SingleClassScene) {
  SceneSpec spec;
  spec.classes = {Archetype::Sphere};
  spec.points_per_class = {500};
  const auto cloud = synth_scene(spec);
  EXPECT_EQ(cloud.num_classes, 1);
  EXPECT_EQ(cloud.size(), 500);
  EXPECT_EQ(class_names(spec), std::vector<std::string>{"sphere"});
}

TEST(Scene, DeterministicPerSeed) {
  SceneSpec a;
  a.seed = 3;
  a.colors = true;
  SceneSpec b = a;
  b.seed = 4;
  const auto x = synth_scene(a);
  const auto y = synth_scene(a);
  EXPECT_TRUE(x.positions == y.positions);
  EXPECT_EQ(*x.labels, *y.labels);
  EXPECT_TRUE(*x.colors == *y.colors);
  EXPECT_FALSE(synth_scene(b).positions == x.positions);
}

TEST(Scene, Validation) {
  SceneSpec spec;
  spec.points_per_class = {1, 2};
  EXPECT_THROW(synth_scene(spec), ArgumentError);
  spec = SceneSpec{};
  spec.extent = -1;
  EXPECT_THROW(synth_scene(spec), ArgumentError);
}

}  // namespace
}  // namespace sqn
