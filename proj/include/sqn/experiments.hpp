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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqn/metrics.hpp"
#include "sqn/scene.hpp"
#include "sqn/trainer.hpp"

namespace sqn {

/// Every seed an experiment depends on.
struct SeedBundle {
  std::uint64_t scene = 1;
  std::uint64_t test_scene = 2;
  std::uint64_t labels = 7;
  std::uint64_t train = 0;
};

/// A training scene, a held-out scene of the same kind, and the run
/// configuration shared by every cell of an experiment.
struct Benchmark {
  PointCloud train_cloud;
  PointCloud test_cloud;
  RunConfig config;
  SeedBundle seeds;
  std::vector<std::string> class_names;
};

/// The default 4-class room (about 8k points) with held-out test room.
Benchmark make_benchmark(const SceneSpec& spec, const RunConfig& config, const SeedBundle& seeds);
Benchmark desk_benchmark(const SeedBundle& seeds = {});

/// Run configuration used by the desk benchmark.
RunConfig desk_config();
/// The default room with per-point colors.
SceneSpec desk_scene();

struct ExperimentCell {
  /// Human-readable axis value, e.g. "0.01", "1+2+3" or "5".
  std::string label;
  double value = 0.0;
  std::uint64_t seed = 0;
  std::size_t num_labels = 0;
  bool retrained = false;
  double oa = 0.0;
  double miou = 0.0;
  std::vector<std::optional<double>> iou;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::string name;
  std::string axis;
  std::vector<ExperimentCell> cells;

  /// Mean mIoU over all cells sharing `label`.
  double mean_miou(const std::string& label) const;
  double mean_oa(const std::string& label) const;
  /// Distinct labels in first-appearance order.
  std::vector<std::string> labels() const;

  /// One row per cell: experiment,axis,label,value,seed,labels,retrained,oa,miou,iou_0..,seconds.
  std::string to_csv() const;
  /// Self-contained HTML page with an SVG chart of mean OA and mIoU per axis value.
  std::string to_html() const;
};

struct ExperimentOptions {
  /// Cells run on this many threads; 1 keeps everything on the caller's thread.
  int threads = 1;
};

/// Trains on `labels` with `config` and scores the held-out scene.
ExperimentCell run_cell(const Benchmark& bench, const SparseLabelSet& labels, const RunConfig& config);

/// One cell per ratio; ratios must be strictly descending and all label
/// sets share the label seed, so each is a subset of the previous one.
ExperimentResult degradation_sweep(const Benchmark& bench, const std::vector<double>& ratios,
                                   const ExperimentOptions& options = {});

using LevelSubset = std::array<bool, kNumLevels>;

/// Level subsets {1}, {4}, {1,2}, {1,2,3}, {1,2,3,4}.
std::vector<LevelSubset> default_level_subsets();
std::string level_subset_label(const LevelSubset& subset);

/// One cell per (subset, seed) at the given label ratio. For a fixed seed all
/// subsets share the label set and the training seed.
ExperimentResult query_level_ablation(const Benchmark& bench, double ratio,
                                      const std::vector<LevelSubset>& subsets,
                                      const std::vector<std::uint64_t>& seeds,
                                      const ExperimentOptions& options = {});

/// One cell per query-head K at the given label ratio.
ExperimentResult k_sweep(const Benchmark& bench, double ratio, const std::vector<int>& ks,
                         const ExperimentOptions& options = {});

/// Seeds 0..n-1; each seed draws its own label set and training seed.
ExperimentResult seed_sensitivity(const Benchmark& bench, double ratio, int num_seeds,
                                  const ExperimentOptions& options = {});

struct MeanStd {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 in the denominator); 0 for n < 2.
  double stddev = 0.0;
};
MeanStd mean_std(const std::vector<double>& values);

}  // namespace sqn
