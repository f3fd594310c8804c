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

#include "sqn/encoder.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sqn/error.hpp"

namespace sqn {
namespace {

using T = Tensor<double>;
using M = Matrix<double>;

M random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  M m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

std::vector<Index> neighbor_table(const Positions& p, Index k) { return build_index(p).knn_batch(p, k); }

EncoderConfig small_config() {
  EncoderConfig c;
  c.level_dims = {4, 6, 8, 8};
  c.decimation = {4, 4, 4, 4};
  c.neighbors = 4;
  return c;
}

TEST(RelativePositionCode, HandExample) {
  const Eigen::RowVector3f center(1.f, 2.f, 3.f);
  Positions nb(2, 3);
  nb << 1.f, 2.f, 3.f, 4.f, 6.f, 3.f;
  const auto code = relative_position_code(center, nb);
  ASSERT_EQ(code.rows(), 2);
  ASSERT_EQ(code.cols(), kRelativeCodeWidth);
  Eigen::Matrix<double, 1, 10> row1;
  row1 << 1, 2, 3, 4, 6, 3, -3, -4, 0, 5;
  EXPECT_TRUE(code.row(1) == row1);
  EXPECT_EQ(code(0, 9), 0.0);
  EXPECT_TRUE(code.row(0).segment(6, 3).isZero());
}

TEST(RelativePositionCode, RelativePartIsTranslationInvariant) {
  std::mt19937_64 rng(1);
  const auto p = oracle::random_positions(40, rng);
  Positions shifted = p;
  shifted.rowwise() += Eigen::RowVector3f(0.25f, -0.5f, 1.0f);
  const auto nb = neighbor_table(p, 5);
  const auto a = relative_position_codes<double>(p, nb, 5);
  const auto b = relative_position_codes<double>(shifted, nb, 5);
  EXPECT_LT((a.rightCols(4) - b.rightCols(4)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_GT((a.leftCols(3) - b.leftCols(3)).cwiseAbs().maxCoeff(), 0.2);
}

TEST(RelativePositionCode, BatchMatchesSingle) {
  std::mt19937_64 rng(2);
  const auto p = oracle::random_positions(30, rng);
  const auto nb = neighbor_table(p, 4);
  const auto batch = relative_position_codes<double>(p, nb, 4);
  for (Index i = 0; i < 30; ++i) {
    Positions rows(4, 3);
    for (Index j = 0; j < 4; ++j) rows.row(j) = p.row(nb[static_cast<std::size_t>(i * 4 + j)]);
    EXPECT_LT((batch.middleRows(i * 4, 4) - relative_position_code(p.row(i), rows)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(relative_position_codes<double>(p, std::span<const Index>(nb).first(10), 4), ShapeError);
}

TEST(AttentivePooling, SingleNeighborIsIdentity) {
  std::mt19937_64 rng(3);
  const M f = random_matrix(7, 5, rng);
  const auto out = attentive_pooling(T::constant(f), T::constant(random_matrix(5, 5, rng)), 1);
  EXPECT_LT((out.value() - f).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AttentivePooling, MatchesTwoLoopOracle) {
  std::mt19937_64 rng(4);
  const Index n = 6, k = 5, d = 3;
  const M f = random_matrix(n * k, d, rng);
  const M gate = random_matrix(d, d, rng);
  const auto out = attentive_pooling(T::constant(f), T::constant(gate), k).value();
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) {
      double denom = 0.0, num = 0.0;
      for (Index j = 0; j < k; ++j) {
        double s = 0.0;
        for (Index e = 0; e < d; ++e) s += f(i * k + j, e) * gate(e, c);
        denom += std::exp(s);
        num += std::exp(s) * f(i * k + j, c);
      }
      EXPECT_NEAR(out(i, c), num / denom, 1e-12);
    }
  }
}

TEST(AttentivePooling, NeighborOrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  const Index k = 6;
  const M f = random_matrix(k, 4, rng);
  const M gate = random_matrix(4, 4, rng);
  std::vector<Index> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto a = attentive_pooling(T::constant(f), T::constant(gate), k).value();
  const auto b = attentive_pooling(gather(T::constant(f), perm), T::constant(gate), k).value();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LfaBlock, NeighborPermutationInvariant) {
  std::mt19937_64 rng(6);
  const auto p = oracle::random_positions(50, rng);
  Parameters<double> params;
  init_lfa_block(params, "b", 4, 8, rng);
  const T x = T::constant(random_matrix(50, 4, rng));
  auto nb = neighbor_table(p, 6);
  const auto a = lfa_block(p, x, nb, 6, params, "b").value();
  for (Index i = 0; i < 50; ++i) std::shuffle(nb.begin() + i * 6, nb.begin() + (i + 1) * 6, rng);
  const auto b = lfa_block(p, x, nb, 6, params, "b").value();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LfaBlock, OutputDependsOnlyOnTwoHopNeighborhood) {
  std::mt19937_64 rng(7);
  const auto p = oracle::random_positions(120, rng);
  const Index k = 4;
  Parameters<double> params;
  init_lfa_block(params, "b", 3, 6, rng);
  const auto nb = neighbor_table(p, k);
  const M x = random_matrix(120, 3, rng);
  const Index target = 0;
  std::set<Index> reach{target};
  for (int hop = 0; hop < 2; ++hop) {
    std::set<Index> next = reach;
    for (Index r : reach) {
      for (Index j = 0; j < k; ++j) next.insert(nb[static_cast<std::size_t>(r * k + j)]);
    }
    reach = next;
  }
  M perturbed = x;
  for (Index i = 0; i < 120; ++i) {
    if (!reach.contains(i)) perturbed.row(i) *= -3.0;
  }
  ASSERT_LT(reach.size(), 120u);
  const auto a = lfa_block(p, T::constant(x), nb, k, params, "b").value();
  const auto b = lfa_block(p, T::constant(perturbed), nb, k, params, "b").value();
  EXPECT_LT((a.row(target) - b.row(target)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT((a - b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LfaBlock, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  const auto p = oracle::random_positions(24, rng);
  Parameters<double> params;
  init_lfa_block(params, "b", 3, 4, rng);
  params.add("x", random_matrix(24, 3, rng));
  const auto nb = neighbor_table(p, 5);
  const M proj = random_matrix(24, 4, rng);
  const auto r = oracle::check_gradients(params, [&](Parameters<double>& ps) {
    return sum(mul(lfa_block(p, ps.get("x"), nb, 5, ps, "b"), T::constant(proj)));
  });
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(RandomSampling, SizesAndDistinctRows) {
  const auto kept = random_sample_indices(1000, 4, 3);
  EXPECT_EQ(kept.size(), 250u);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
  EXPECT_EQ(std::set<Index>(kept.begin(), kept.end()).size(), 250u);
  EXPECT_EQ(random_sample_indices(10, 4, 3).size(), 3u);
  EXPECT_EQ(kept, random_sample_indices(1000, 4, 3));
  EXPECT_NE(kept, random_sample_indices(1000, 4, 4));
}

TEST(Encoder, LevelSizes) {
  EncoderConfig c;
  const auto a = c.level_sizes(256);
  EXPECT_EQ(a, (std::array<Index, 4>{64, 16, 4, 1}));
  const auto b = c.level_sizes(1024);
  EXPECT_EQ(b, (std::array<Index, 4>{256, 64, 16, 4}));
  EXPECT_THROW(c.level_sizes(100), ArgumentError);
}

TEST(Encoder, LevelShapesAndProvenance) {
  std::mt19937_64 rng(9);
  PointCloud cloud;
  cloud.positions = oracle::random_positions(1024, rng);
  const auto cfg = small_config();
  Parameters<double> params;
  init_encoder(params, cfg, input_feature_width(false), rng);
  const auto hf = encode(cloud.positions, T::constant(input_features<double>(cloud, false)), params, cfg, 5);
  const std::array<Index, 4> sizes{256, 64, 16, 4};
  for (int l = 0; l < kNumLevels; ++l) {
    const auto& lv = hf.levels[l];
    EXPECT_EQ(lv.positions.rows(), sizes[l]);
    EXPECT_EQ(lv.features.rows(), sizes[l]);
    EXPECT_EQ(lv.features.cols(), cfg.level_dims[l]);
    for (std::size_t i = 0; i < lv.source.size(); ++i) {
      EXPECT_TRUE(lv.positions.row(static_cast<Index>(i)) == cloud.positions.row(lv.source[i]));
    }
  }
}

TEST(Encoder, DeterministicForSeed) {
  std::mt19937_64 rng(10);
  PointCloud cloud;
  cloud.positions = oracle::random_positions(512, rng);
  const auto cfg = small_config();
  Parameters<float> params;
  init_encoder(params, cfg, 4, rng);
  const auto x = Tensor<float>::constant(input_features<float>(cloud, false));
  const auto a = encode(cloud.positions, x, params, cfg, 1);
  const auto b = encode(cloud.positions, x, params, cfg, 1);
  const auto c = encode(cloud.positions, x, params, cfg, 2);
  EXPECT_TRUE(a.levels[3].features.value() == b.levels[3].features.value());
  EXPECT_NE(a.levels[0].source, c.levels[0].source);
}

TEST(Encoder, EndToEndGradients) {
  std::mt19937_64 rng(11);
  PointCloud cloud;
  cloud.positions = oracle::random_positions(256, rng);
  const auto cfg = small_config();
  Parameters<double> params;
  init_encoder(params, cfg, 4, rng);
  const T x = T::constant(input_features<double>(cloud, false));
  std::vector<M> proj;
  for (int l = 0; l < kNumLevels; ++l) proj.push_back(random_matrix(cfg.level_sizes(256)[l], cfg.level_dims[l], rng));
  const auto r = oracle::check_gradients(
      params,
      [&](Parameters<double>& ps) {
        const auto hf = encode(cloud.positions, x, ps, cfg, 3);
        T total = sum(mul(hf.levels[0].features, T::constant(proj[0])));
        for (int l = 1; l < kNumLevels; ++l) total = add(total, sum(mul(hf.levels[l].features, T::constant(proj[l]))));
        return total;
      },
      1e-6, 1e-4, 6, 12);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(Encoder, ColorsRequiredWhenRequested) {
  PointCloud cloud;
  cloud.positions = Positions::Zero(4, 3);
  EXPECT_THROW(input_features<float>(cloud, true), ArgumentError);
  EXPECT_EQ(input_features<float>(cloud, false).cols(), 4);
}

}  // namespace
}  // namespace sqn
