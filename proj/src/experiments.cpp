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

#include "sqn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include "sqn/error.hpp"
#include "sqn/model.hpp"

namespace sqn {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Runs jobs[i] into out[i], sequentially or on a small pool.
void run_jobs(std::vector<std::function<ExperimentCell()>>& jobs, std::vector<ExperimentCell>& out,
              int threads) {
  out.resize(jobs.size());
  if (threads <= 1 || jobs.size() < 2) {
    for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = jobs[i]();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  {
    std::vector<std::jthread> pool;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(threads), jobs.size());
    for (std::size_t t = 0; t < n; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            out[i] = jobs[i]();
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

RunConfig desk_config() {
  RunConfig config;
  config.train.epochs = 100;
  config.train.steps_per_epoch = 5;
  config.train.queries_per_step = 256;
  config.train.learning_rate = 0.01;
  config.train.lr_decay = 0.98;
  config.train.retrain = RetrainMode::Off;
  return config;
}

SceneSpec desk_scene() {
  SceneSpec spec;
  spec.colors = true;
  return spec;
}

Benchmark make_benchmark(const SceneSpec& spec, const RunConfig& config, const SeedBundle& seeds) {
  Benchmark bench;
  SceneSpec train_spec = spec;
  train_spec.seed = seeds.scene;
  SceneSpec test_spec = spec;
  test_spec.seed = seeds.test_scene;
  bench.train_cloud = synth_scene(train_spec);
  bench.test_cloud = synth_scene(test_spec);
  bench.config = config;
  bench.config.train.seed = seeds.train;
  bench.seeds = seeds;
  bench.class_names = class_names(spec);
  return bench;
}

Benchmark desk_benchmark(const SeedBundle& seeds) { return make_benchmark(desk_scene(), desk_config(), seeds); }

ExperimentCell run_cell(const Benchmark& bench, const SparseLabelSet& labels, const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto trained = train_weakly(bench.train_cloud, labels, config.encoder, config.query, config.train);
  const auto predicted = predict(trained.model, bench.test_cloud);
  const auto cm = accumulate(*bench.test_cloud.labels, predicted, bench.test_cloud.num_classes);
  ExperimentCell cell;
  cell.seed = config.train.seed;
  cell.num_labels = labels.size();
  cell.retrained = trained.retrained;
  cell.oa = oa(cm);
  cell.miou = miou(cm);
  cell.iou = per_class_iou(cm);
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

ExperimentResult degradation_sweep(const Benchmark& bench, const std::vector<double>& ratios,
                                   const ExperimentOptions& options) {
  if (ratios.empty()) throw ArgumentError("degradation sweep needs at least one ratio");
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (!(ratios[i] < ratios[i - 1])) throw ArgumentError("degradation ratios must be strictly descending");
  }
  ExperimentResult result;
  result.name = "degradation";
  result.axis = "ratio";
  std::vector<std::function<ExperimentCell()>> jobs;
  for (double r : ratios) {
    jobs.push_back([&bench, r] {
      const auto labels = sample_sparse_labels(bench.train_cloud, r, bench.seeds.labels);
      auto cell = run_cell(bench, labels, bench.config);
      cell.label = format_short(r);
      cell.value = r;
      return cell;
    });
  }
  run_jobs(jobs, result.cells, options.threads);
  return result;
}

std::vector<LevelSubset> default_level_subsets() {
  return {{true, false, false, false},
          {false, false, false, true},
          {true, true, false, false},
          {true, true, true, false},
          {true, true, true, true}};
}

std::string level_subset_label(const LevelSubset& subset) {
  std::string out;
  for (int l = 0; l < kNumLevels; ++l) {
    if (!subset[static_cast<std::size_t>(l)]) continue;
    if (!out.empty()) out += '+';
    out += std::to_string(l + 1);
  }
  return out;
}

ExperimentResult query_level_ablation(const Benchmark& bench, double ratio,
                                      const std::vector<LevelSubset>& subsets,
                                      const std::vector<std::uint64_t>& seeds,
                                      const ExperimentOptions& options) {
  if (subsets.empty() || seeds.empty()) throw ArgumentError("level ablation needs subsets and seeds");
  ExperimentResult result;
  result.name = "level_ablation";
  result.axis = "levels";
  std::vector<std::function<ExperimentCell()>> jobs;
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (std::uint64_t seed : seeds) {
      jobs.push_back([&bench, &subsets, s, seed, ratio] {
        RunConfig config = bench.config;
        config.query.levels = subsets[s];
        config.train.seed = derive_seed(bench.seeds.train, 0x41424c, seed);
        const auto labels =
            sample_sparse_labels(bench.train_cloud, ratio, derive_seed(bench.seeds.labels, 0x41424c, seed));
        auto cell = run_cell(bench, labels, config);
        cell.label = level_subset_label(subsets[s]);
        cell.value = static_cast<double>(s);
        cell.seed = seed;
        return cell;
      });
    }
  }
  run_jobs(jobs, result.cells, options.threads);
  return result;
}

ExperimentResult k_sweep(const Benchmark& bench, double ratio, const std::vector<int>& ks,
                         const ExperimentOptions& options) {
  if (ks.empty()) throw ArgumentError("K sweep needs at least one K");
  ExperimentResult result;
  result.name = "k_sweep";
  result.axis = "k";
  const auto labels = sample_sparse_labels(bench.train_cloud, ratio, bench.seeds.labels);
  std::vector<std::function<ExperimentCell()>> jobs;
  for (int k : ks) {
    jobs.push_back([&bench, &labels, k] {
      RunConfig config = bench.config;
      config.query.k = k;
      auto cell = run_cell(bench, labels, config);
      cell.label = std::to_string(k);
      cell.value = k;
      return cell;
    });
  }
  run_jobs(jobs, result.cells, options.threads);
  return result;
}

ExperimentResult seed_sensitivity(const Benchmark& bench, double ratio, int num_seeds,
                                  const ExperimentOptions& options) {
  if (num_seeds < 1) throw ArgumentError("seed sensitivity needs at least one seed");
  ExperimentResult result;
  result.name = "seed_sensitivity";
  result.axis = "seed";
  std::vector<std::function<ExperimentCell()>> jobs;
  for (int s = 0; s < num_seeds; ++s) {
    jobs.push_back([&bench, ratio, s] {
      const auto seed = static_cast<std::uint64_t>(s);
      RunConfig config = bench.config;
      config.train.seed = derive_seed(bench.seeds.train, 0x534545, seed);
      const auto labels =
          sample_sparse_labels(bench.train_cloud, ratio, derive_seed(bench.seeds.labels, 0x534545, seed));
      auto cell = run_cell(bench, labels, config);
      cell.label = std::to_string(s);
      cell.value = s;
      cell.seed = seed;
      return cell;
    });
  }
  run_jobs(jobs, result.cells, options.threads);
  return result;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) throw ArgumentError("mean of an empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

std::vector<std::string> ExperimentResult::labels() const {
  std::vector<std::string> out;
  for (const auto& c : cells) {
    if (std::find(out.begin(), out.end(), c.label) == out.end()) out.push_back(c.label);
  }
  return out;
}

double ExperimentResult::mean_miou(const std::string& label) const {
  std::vector<double> v;
  for (const auto& c : cells) {
    if (c.label == label) v.push_back(c.miou);
  }
  return mean_std(v).mean;
}

double ExperimentResult::mean_oa(const std::string& label) const {
  std::vector<double> v;
  for (const auto& c : cells) {
    if (c.label == label) v.push_back(c.oa);
  }
  return mean_std(v).mean;
}

std::string ExperimentResult::to_csv() const {
  std::size_t num_classes = 0;
  for (const auto& c : cells) num_classes = std::max(num_classes, c.iou.size());
  std::string out = "experiment,axis,label,value,seed,labels,retrained,oa,miou";
  for (std::size_t c = 0; c < num_classes; ++c) out += ",iou_" + std::to_string(c);
  out += ",seconds\n";
  for (const auto& c : cells) {
    out += name + "," + axis + "," + c.label + "," + format_double(c.value) + "," + std::to_string(c.seed) +
           "," + std::to_string(c.num_labels) + "," + (c.retrained ? "1" : "0") + "," + format_double(c.oa) +
           "," + format_double(c.miou);
    for (std::size_t k = 0; k < num_classes; ++k) {
      out += ",";
      if (k < c.iou.size() && c.iou[k]) out += format_double(*c.iou[k]);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, ",%.3f\n", c.seconds);
    out += buf;
  }
  return out;
}

std::string ExperimentResult::to_html() const {
  const auto names = labels();
  const double width = 640, height = 360, left = 60, right = 20, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto x_at = [&](std::size_t i) {
    return names.size() < 2 ? left + plot_w / 2 : left + plot_w * static_cast<double>(i) / static_cast<double>(names.size() - 1);
  };
  auto y_at = [&](double v) { return top + plot_h * (1.0 - v); };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", width, height);
  svg += buf;
  for (int t = 0; t <= 10; t += 2) {
    const double v = t / 10.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%.1f\" x2=\"%g\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%g\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.1f</text>\n",
                  left, y_at(v), width - right, y_at(v), left - 6, y_at(v) + 4, v);
    svg += buf;
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%s</text>\n",
                  x_at(i), height - bottom + 18, names[i].c_str());
    svg += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                left + plot_w / 2, height - 8, axis.c_str());
  svg += buf;
  const std::pair<const char*, const char*> series[] = {{"mIoU", "#c0392b"}, {"OA", "#2471a3"}};
  for (const auto& [metric, color] : series) {
    std::string points;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double v = std::string(metric) == "OA" ? mean_oa(names[i]) : mean_miou(names[i]);
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x_at(i), y_at(v));
      points += buf;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"><title>%s %s = %.4f</title></circle>\n",
                    x_at(i), y_at(v), color, metric, names[i].c_str(), v);
      svg += buf;
    }
    svg += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" + std::string(color) + "\" points=\"" + points + "\"/>\n";
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"18\" font-size=\"12\" fill=\"#c0392b\">mIoU</text>"
                "<text x=\"%g\" y=\"18\" font-size=\"12\" fill=\"#2471a3\">OA</text>\n",
                left, left + 50);
  svg += buf;
  svg += "</svg>\n";

  std::string html = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + name +
                     "</title></head>\n<body style=\"font-family:sans-serif\">\n<h2>" + name + "</h2>\n" + svg +
                     "<table border=\"1\" cellpadding=\"4\" style=\"border-collapse:collapse\">\n<tr><th>" + axis +
                     "</th><th>seed</th><th>labels</th><th>OA</th><th>mIoU</th></tr>\n";
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "<tr><td>%s</td><td>%llu</td><td>%zu</td><td>%.4f</td><td>%.4f</td></tr>\n",
                  c.label.c_str(), static_cast<unsigned long long>(c.seed), c.num_labels, c.oa, c.miou);
    html += buf;
  }
  html += "</table>\n</body></html>\n";
  return html;
}

}  // namespace sqn
