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

#include "sqn/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sqn/error.hpp"

namespace sqn {
namespace {

TEST(Metrics, HandExample) {
  const std::vector<Label> truth{0, 0, 0, 1};
  const std::vector<Label> pred{0, 0, 1, 1};
  const auto cm = accumulate(truth, pred, 2);
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.total(), 4u);
  EXPECT_DOUBLE_EQ(oa(cm), 0.75);
  EXPECT_NEAR(macc(cm), 5.0 / 6.0, 1e-15);
  const auto iou = per_class_iou(cm);
  EXPECT_NEAR(*iou[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*iou[1], 0.5, 1e-15);
  EXPECT_NEAR(miou(cm), 7.0 / 12.0, 1e-15);
}

TEST(Metrics, AbsentClassExcludedFromMean) {
  const std::vector<Label> truth{0, 0, 0, 1};
  const std::vector<Label> pred{0, 0, 1, 1};
  const auto cm = accumulate(truth, pred, 4);
  const auto iou = per_class_iou(cm);
  EXPECT_FALSE(iou[2].has_value());
  EXPECT_FALSE(iou[3].has_value());
  EXPECT_NEAR(miou(cm), 7.0 / 12.0, 1e-15);
}

TEST(Metrics, PerfectPrediction) {
  const std::vector<Label> truth{0, 1, 2, 2, 1};
  const auto cm = accumulate(truth, truth, 3);
  EXPECT_DOUBLE_EQ(oa(cm), 1.0);
  EXPECT_DOUBLE_EQ(miou(cm), 1.0);
  EXPECT_DOUBLE_EQ(macc(cm), 1.0);
}

TEST(Metrics, InvariantToPointOrder) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> c(0, 4);
  std::vector<Label> truth(500), pred(500);
  for (std::size_t i = 0; i < 500; ++i) {
    truth[i] = static_cast<Label>(c(rng));
    pred[i] = static_cast<Label>(c(rng));
  }
  std::vector<std::size_t> perm(500);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Label> t2(500), p2(500);
  for (std::size_t i = 0; i < 500; ++i) {
    t2[i] = truth[perm[i]];
    p2[i] = pred[perm[i]];
  }
  EXPECT_EQ(accumulate(truth, pred, 5), accumulate(t2, p2, 5));
}

TEST(Metrics, ShardsMerge) {
  const std::vector<Label> truth{0, 1, 2, 1, 0, 2};
  const std::vector<Label> pred{0, 2, 2, 1, 1, 2};
  auto a = accumulate(std::span<const Label>(truth).first(3), std::span<const Label>(pred).first(3), 3);
  a += accumulate(std::span<const Label>(truth).last(3), std::span<const Label>(pred).last(3), 3);
  EXPECT_EQ(a, accumulate(truth, pred, 3));
}

TEST(Metrics, Errors) {
  const std::vector<Label> a{0, 1}, b{0};
  EXPECT_THROW(accumulate(a, b, 2), ArgumentError);
  const std::vector<Label> c{0, 5};
  EXPECT_THROW(accumulate(a, c, 2), ArgumentError);
}

PointCloud two_class_cloud(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointCloud c;
  c.positions = oracle::random_positions(n, rng);
  std::vector<Label> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = c.positions(i, 0) > 0.f ? 1 : 0;
  c.labels = labels;
  c.num_classes = 2;
  return c;
}

TEST(BoundaryMask, MatchesBruteForce) {
  const auto cloud = two_class_cloud(800, 2);
  for (double r : {0.05, 0.1, 0.3}) {
    const auto mask = boundary_mask(cloud, r);
    for (Index i = 0; i < cloud.size(); ++i) {
      bool expected = false;
      for (Index j : oracle::brute_radius(cloud.positions, cloud.positions.row(i), r)) {
        expected = expected || (*cloud.labels)[j] != (*cloud.labels)[i];
      }
      EXPECT_EQ(mask[i], expected) << i << " r=" << r;
    }
  }
}

TEST(BoundaryMask, GrowsWithRadius) {
  const auto cloud = two_class_cloud(600, 3);
  const auto small = boundary_mask(cloud, 0.05);
  const auto large = boundary_mask(cloud, 0.2);
  std::size_t ns = 0, nl = 0;
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (small[i]) EXPECT_TRUE(large[i]);
    ns += small[i];
    nl += large[i];
  }
  EXPECT_LT(ns, nl);
}

TEST(BoundaryMask, SingleClassHasNoBoundary) {
  auto cloud = two_class_cloud(100, 4);
  std::fill(cloud.labels->begin(), cloud.labels->end(), 1);
  const auto mask = boundary_mask(cloud, 0.5);
  EXPECT_TRUE(std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }));
}

TEST(EvalReport, ContainsSplitMetricsAndRoundTrips) {
  const auto cloud = two_class_cloud(400, 5);
  std::vector<Label> pred = *cloud.labels;
  for (std::size_t i = 0; i < pred.size(); i += 7) pred[i] = 1 - pred[i];
  const std::vector<double> radii{0.3};
  const auto report = evaluate_predictions(cloud, pred, radii);
  ASSERT_TRUE(report.find("oa").has_value());
  ASSERT_TRUE(report.find("iou", 1).has_value());
  ASSERT_TRUE(report.find("boundary_miou@0.3").has_value());
  ASSERT_TRUE(report.find("interior_miou@0.3").has_value());
  EXPECT_NEAR(*report.find("miou"), miou(accumulate(*cloud.labels, pred, 2)), 1e-15);
  const auto parsed = EvalReport::from_csv(report.to_csv());
  ASSERT_EQ(parsed.rows.size(), report.rows.size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    EXPECT_EQ(parsed.rows[i].metric, report.rows[i].metric);
    EXPECT_EQ(parsed.rows[i].cls, report.rows[i].cls);
    EXPECT_NEAR(parsed.rows[i].value, report.rows[i].value, 1e-12);
  }
  EXPECT_EQ(report.to_csv().rfind("metric,class,value\n", 0), 0u);
}

TEST(EvalReport, RadiusFormatting) {
  EXPECT_EQ(format_radius(0.1), "0.1");
  EXPECT_EQ(format_radius(0.05), "0.05");
}

}  // namespace
}  // namespace sqn
