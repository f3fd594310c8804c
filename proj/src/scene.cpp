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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "sqn/error.hpp"

namespace sqn {

namespace {

struct BoxShape {
  double cx, cy, hx, hy, height;
};

struct SphereShape {
  double cx, cy, radius;
};

struct Layout {
  std::vector<BoxShape> boxes;
  std::vector<SphereShape> spheres;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Layout place_objects(const SceneSpec& spec, Rng& rng) {
  Layout layout;
  const double half = spec.extent / 2.0;
  const double margin = 0.3;
  const double gap = 0.15;
  // Footprints as (x, y, bounding radius) for overlap rejection.
  std::vector<std::array<double, 3>> taken;
  auto place = [&](double radius) -> std::array<double, 2> {
    const double lim = half - margin - radius;
    if (lim <= 0.0) throw ArgumentError("scene extent too small for its objects");
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double x = uniform(rng, -lim, lim);
      const double y = uniform(rng, -lim, lim);
      bool clear = true;
      for (const auto& t : taken) {
        if (std::hypot(x - t[0], y - t[1]) < radius + t[2] + gap) {
          clear = false;
          break;
        }
      }
      if (clear) {
        taken.push_back({x, y, radius});
        return {x, y};
      }
    }
    throw ArgumentError("could not place scene objects without overlap");
  };
  for (int i = 0; i < spec.num_boxes; ++i) {
    BoxShape b{};
    b.hx = uniform(rng, 0.25, 0.45);
    b.hy = uniform(rng, 0.25, 0.45);
    b.height = uniform(rng, 0.4, 0.8);
    const auto c = place(std::hypot(b.hx, b.hy));
    b.cx = c[0];
    b.cy = c[1];
    layout.boxes.push_back(b);
  }
  for (int i = 0; i < spec.num_spheres; ++i) {
    SphereShape s{};
    s.radius = uniform(rng, 0.2, 0.35);
    const auto c = place(s.radius);
    s.cx = c[0];
    s.cy = c[1];
    layout.spheres.push_back(s);
  }
  return layout;
}

bool under_box(const Layout& layout, double x, double y) {
  for (const auto& b : layout.boxes) {
    if (std::abs(x - b.cx) <= b.hx && std::abs(y - b.cy) <= b.hy) return true;
  }
  return false;
}

// Index drawn with probability proportional to weights.
std::size_t pick(Rng& rng, const std::vector<double>& weights) {
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return d(rng);
}

Eigen::Vector3d sample_floor(const SceneSpec& spec, const Layout& layout, Rng& rng) {
  const double half = spec.extent / 2.0;
  for (;;) {
    const double x = uniform(rng, -half, half);
    const double y = uniform(rng, -half, half);
    if (!under_box(layout, x, y)) return {x, y, 0.0};
  }
}

Eigen::Vector3d sample_wall(const SceneSpec& spec, Rng& rng) {
  const double half = spec.extent / 2.0;
  const int side = std::uniform_int_distribution<int>(0, 3)(rng);
  const double t = uniform(rng, -half, half);
  const double z = uniform(rng, 0.0, spec.wall_height);
  switch (side) {
    case 0:
      return {-half, t, z};
    case 1:
      return {half, t, z};
    case 2:
      return {t, -half, z};
    default:
      return {t, half, z};
  }
}

Eigen::Vector3d sample_box(const Layout& layout, Rng& rng) {
  std::vector<double> areas;
  for (const auto& b : layout.boxes) {
    areas.push_back(4 * b.hx * b.hy + 4 * b.height * (b.hx + b.hy));
  }
  const auto& b = layout.boxes[pick(rng, areas)];
  // Faces: top, then -x, +x, -y, +y sides. The bottom rests on the floor.
  const std::vector<double> faces{4 * b.hx * b.hy, 2 * b.hy * b.height, 2 * b.hy * b.height,
                                  2 * b.hx * b.height, 2 * b.hx * b.height};
  const auto f = pick(rng, faces);
  const double u = uniform(rng, -1.0, 1.0);
  const double v = uniform(rng, 0.0, 1.0);
  switch (f) {
    case 0:
      return {b.cx + u * b.hx, b.cy + uniform(rng, -b.hy, b.hy), b.height};
    case 1:
      return {b.cx - b.hx, b.cy + u * b.hy, v * b.height};
    case 2:
      return {b.cx + b.hx, b.cy + u * b.hy, v * b.height};
    case 3:
      return {b.cx + u * b.hx, b.cy - b.hy, v * b.height};
    default:
      return {b.cx + u * b.hx, b.cy + b.hy, v * b.height};
  }
}

Eigen::Vector3d sample_sphere(const Layout& layout, Rng& rng) {
  std::vector<double> areas;
  for (const auto& s : layout.spheres) areas.push_back(s.radius * s.radius);
  const auto& s = layout.spheres[pick(rng, areas)];
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector3d dir;
  do {
    dir = {g(rng), g(rng), g(rng)};
  } while (dir.norm() < 1e-12);
  dir.normalize();
  return Eigen::Vector3d(s.cx, s.cy, s.radius) + s.radius * dir;
}

std::array<int, 3> base_color(Archetype a) {
  switch (a) {
    case Archetype::Floor:
      return {140, 110, 80};
    case Archetype::Wall:
      return {200, 200, 190};
    case Archetype::Box:
      return {70, 90, 160};
    case Archetype::Sphere:
      return {180, 60, 50};
  }
  return {0, 0, 0};
}

}  // namespace

std::string archetype_name(Archetype a) {
  switch (a) {
    case Archetype::Floor:
      return "floor";
    case Archetype::Wall:
      return "wall";
    case Archetype::Box:
      return "box";
    case Archetype::Sphere:
      return "sphere";
  }
  return "unknown";
}

void SceneSpec::validate() const {
  if (classes.empty()) throw ArgumentError("scene needs at least one class");
  if (classes.size() != points_per_class.size()) {
    throw ArgumentError("scene lists " + std::to_string(classes.size()) + " classes but " +
                        std::to_string(points_per_class.size()) + " point counts");
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (std::count(classes.begin(), classes.end(), classes[i]) > 1) {
      throw ArgumentError("scene archetype '" + archetype_name(classes[i]) + "' listed twice");
    }
    if (points_per_class[i] < 0) throw ArgumentError("negative point count in scene spec");
  }
  if (!(extent > 0.0) || !(wall_height > 0.0)) throw ArgumentError("scene dimensions must be positive");
  if (jitter < 0.0) throw ArgumentError("scene jitter must be non-negative");
  const bool boxes = std::count(classes.begin(), classes.end(), Archetype::Box) > 0;
  const bool spheres = std::count(classes.begin(), classes.end(), Archetype::Sphere) > 0;
  if (boxes && num_boxes < 1) throw ArgumentError("box class needs at least one box");
  if (spheres && num_spheres < 1) throw ArgumentError("sphere class needs at least one sphere");
}

Index SceneSpec::total_points() const {
  Index n = 0;
  for (Index c : points_per_class) n += c;
  return n;
}

PointCloud synth_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0x5343454e45));
  const bool want_boxes = std::count(spec.classes.begin(), spec.classes.end(), Archetype::Box) > 0;
  const bool want_spheres = std::count(spec.classes.begin(), spec.classes.end(), Archetype::Sphere) > 0;
  SceneSpec layout_spec = spec;
  if (!want_boxes) layout_spec.num_boxes = 0;
  if (!want_spheres) layout_spec.num_spheres = 0;
  const Layout layout = place_objects(layout_spec, rng);

  const Index n = spec.total_points();
  Positions raw(n, 3);
  std::vector<Label> labels;
  labels.reserve(static_cast<std::size_t>(n));
  std::normal_distribution<double> noise(0.0, 1.0);
  Index row = 0;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    for (Index i = 0; i < spec.points_per_class[c]; ++i) {
      Eigen::Vector3d p;
      switch (spec.classes[c]) {
        case Archetype::Floor:
          p = sample_floor(spec, layout, rng);
          break;
        case Archetype::Wall:
          p = sample_wall(spec, rng);
          break;
        case Archetype::Box:
          p = sample_box(layout, rng);
          break;
        case Archetype::Sphere:
          p = sample_sphere(layout, rng);
          break;
      }
      if (spec.jitter > 0.0) {
        for (int d = 0; d < 3; ++d) p[d] += spec.jitter * noise(rng);
      }
      raw.row(row++) = p.cast<float>().transpose();
      labels.push_back(static_cast<Label>(c));
    }
  }

  // Interleave the classes so file order carries no label information.
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);

  PointCloud cloud;
  cloud.num_classes = static_cast<int>(spec.classes.size());
  cloud.positions.resize(n, 3);
  std::vector<Label> shuffled(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    cloud.positions.row(i) = raw.row(order[static_cast<std::size_t>(i)]);
    shuffled[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  if (spec.colors) {
    Colors colors(n, 3);
    std::normal_distribution<double> tint(0.0, 12.0);
    for (Index i = 0; i < n; ++i) {
      const auto base = base_color(spec.classes[shuffled[static_cast<std::size_t>(i)]]);
      for (int d = 0; d < 3; ++d) {
        colors(i, d) = static_cast<std::uint8_t>(std::clamp(std::lround(base[d] + tint(rng)), 0L, 255L));
      }
    }
    cloud.colors = std::move(colors);
  }
  cloud.labels = std::move(shuffled);
  cloud.validate();
  return cloud;
}

std::vector<std::string> class_names(const SceneSpec& spec) {
  std::vector<std::string> names;
  for (auto a : spec.classes) names.push_back(archetype_name(a));
  return names;
}

}  // namespace sqn
