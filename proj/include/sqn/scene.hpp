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
#include <string>
#include <vector>

#include "sqn/point_cloud.hpp"

namespace sqn {

enum class Archetype { Floor, Wall, Box, Sphere };

std::string archetype_name(Archetype a);

/// A room-like scene: a square floor of side `extent` centered on the
/// origin, walls around it, boxes standing on the floor and spheres resting
/// on the floor. Each listed archetype becomes one class, in list order.
struct SceneSpec {
  double extent = 4.0;
  double wall_height = 2.0;
  std::vector<Archetype> classes{Archetype::Floor, Archetype::Wall, Archetype::Box, Archetype::Sphere};
  std::vector<Index> points_per_class{2400, 2400, 1600, 1600};
  int num_boxes = 3;
  int num_spheres = 3;
  /// Standard deviation of the Gaussian surface noise, in meters.
  double jitter = 0.005;
  bool colors = false;
  std::uint64_t seed = 0;

  void validate() const;
  Index total_points() const;
};

/// Labeled cloud following `spec`; deterministic per seed. Class counts are
/// exactly `points_per_class`.
PointCloud synth_scene(const SceneSpec& spec);

std::vector<std::string> class_names(const SceneSpec& spec);

}  // namespace sqn
