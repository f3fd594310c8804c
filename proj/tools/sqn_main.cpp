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

// Command-line front end: data preparation, training, inference,
// evaluation, the experiment suites and the annotation service.

#include <CLI11.hpp>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "sqn/annotation_service.hpp"
#include "sqn/binary_io.hpp"
#include "sqn/cloud_io.hpp"
#include "sqn/error.hpp"
#include "sqn/experiments.hpp"
#include "sqn/metrics.hpp"
#include "sqn/model.hpp"
#include "sqn/sampling.hpp"
#include "sqn/scene.hpp"
#include "sqn/trainer.hpp"

namespace fs = std::filesystem;
using namespace sqn;

namespace {

PointCloud read_cloud(const fs::path& path, int num_classes = 0) {
  return load_cloud(path, format_from_path(path), num_classes);
}

void write_cloud(const PointCloud& cloud, const fs::path& path) { save_cloud(cloud, path, format_from_path(path)); }

RunConfig read_config(const std::string& path) { return path.empty() ? desk_config() : load_run_config(path); }

Model read_model(const fs::path& checkpoint, const RunConfig& config) {
  return model_from_parameters(load_checkpoint(checkpoint), config.encoder, config.query);
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

void write_experiment(const ExperimentResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_file(out_dir / (result.name + ".csv"), result.to_csv());
  write_file(out_dir / (result.name + ".html"), result.to_html());
  for (const auto& label : result.labels()) {
    std::printf("%s=%-8s oa=%.4f miou=%.4f\n", result.axis.c_str(), label.c_str(), result.mean_oa(label),
                result.mean_miou(label));
  }
}

std::vector<double> parse_doubles(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(std::stod(s));
  return out;
}

AnnotationService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised point-cloud segmentation with semantic queries"};
  app.require_subcommand(1);

  // convert
  std::string in_path, out_path;
  int classes = 0;
  auto* convert = app.add_subcommand("convert", "Convert between SQNC and ASCII XYZ (chosen by extension)");
  convert->add_option("--in", in_path, "Input cloud")->required();
  convert->add_option("--out", out_path, "Output cloud")->required();
  convert->add_option("--classes", classes, "Class count for ASCII input (0 derives it from the labels)");

  // gridsample
  double cell = 0.04;
  auto* gridsample = app.add_subcommand("gridsample", "Grid-downsample a cloud");
  gridsample->add_option("--in", in_path, "Input cloud")->required();
  gridsample->add_option("--out", out_path, "Output cloud")->required();
  gridsample->add_option("--cell", cell, "Cell size in meters")->check(CLI::PositiveNumber);

  // synth
  std::uint64_t seed = 1;
  bool colors = false;
  std::vector<Index> counts;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic room");
  synth->add_option("--out", out_path, "Output cloud")->required();
  synth->add_option("--seed", seed, "Scene seed");
  synth->add_option("--points", counts, "Points per class (floor wall box sphere)")->expected(4)->delimiter(',');
  synth->add_flag("--colors", colors, "Add per-class colors");

  // label-sample
  std::string cloud_path, labels_path;
  double ratio = 0.005;
  auto* label_sample = app.add_subcommand("label-sample", "Draw a sparse label set from ground truth");
  label_sample->add_option("--cloud", cloud_path, "Labeled cloud")->required();
  label_sample->add_option("--ratio", ratio, "Fraction of points to label");
  label_sample->add_option("--seed", seed, "Sampling seed");
  label_sample->add_option("--out", out_path, "SQNL output")->required();

  // train
  std::string config_path, resume_path, log_path;
  auto* train_cmd = app.add_subcommand("train", "Train on sparse labels");
  train_cmd->add_option("--cloud", cloud_path, "Training cloud")->required();
  train_cmd->add_option("--labels", labels_path, "SQNL label file")->required();
  train_cmd->add_option("--config", config_path, "key=value run configuration");
  train_cmd->add_option("--out", out_path, "Checkpoint output")->required();
  train_cmd->add_option("--log", log_path, "Training log CSV (default: next to the checkpoint)");
  train_cmd->add_option("--resume", resume_path, "Continue from this checkpoint (first stage only)");

  // infer
  std::string ckpt_path, queries_path;
  auto* infer = app.add_subcommand("infer", "Predict classes at the cloud points or at arbitrary positions");
  infer->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  infer->add_option("--config", config_path, "Run configuration used for training");
  infer->add_option("--cloud", cloud_path, "Cloud to encode")->required();
  infer->add_option("--queries", queries_path, "Query positions (SQNC or ASCII); default: the cloud points");
  infer->add_option("--out", out_path, "SQNP output")->required();

  // eval
  std::string pred_path;
  std::vector<double> radii;
  auto* eval = app.add_subcommand("eval", "Score a model or a prediction file against ground truth");
  eval->add_option("--cloud", cloud_path, "Labeled cloud")->required();
  eval->add_option("--ckpt", ckpt_path, "Checkpoint");
  eval->add_option("--config", config_path, "Run configuration used for training");
  eval->add_option("--pred", pred_path, "SQNP predictions instead of a checkpoint");
  eval->add_option("--radius", radii, "Boundary radius (repeatable)");
  eval->add_option("--out", out_path, "Report CSV (default: stdout)");

  // experiment suites
  std::string out_dir = "results";
  std::vector<std::string> ratio_list{"0.1", "0.01", "0.001", "0.0001"};
  std::vector<int> ks{1, 3, 5, 10, 25};
  int num_seeds = 5;
  int threads = 1;
  SeedBundle bundle;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (default: desk configuration)");
    sub->add_option("--out-dir", out_dir, "Directory for CSV and HTML output");
    sub->add_option("--scene-seed", bundle.scene, "Training scene seed");
    sub->add_option("--test-seed", bundle.test_scene, "Held-out scene seed");
    sub->add_option("--label-seed", bundle.labels, "Label sampling seed");
    sub->add_option("--train-seed", bundle.train, "Training seed");
    sub->add_option("--threads", threads, "Cells run in parallel");
  };
  auto* sweep_ratio = app.add_subcommand("sweep-ratio", "Degradation over labeling ratios");
  add_common(sweep_ratio);
  sweep_ratio->add_option("--ratios", ratio_list, "Descending ratios")->delimiter(',');
  auto* ablate = app.add_subcommand("ablate-levels", "Query-level ablation");
  add_common(ablate);
  ablate->add_option("--ratio", ratio, "Label ratio");
  ablate->add_option("--seeds", num_seeds, "Seeds per subset")->check(CLI::PositiveNumber);
  auto* sweep_k = app.add_subcommand("sweep-k", "Query-head K sweep");
  add_common(sweep_k);
  sweep_k->add_option("--ratio", ratio, "Label ratio");
  sweep_k->add_option("--ks", ks, "K values")->delimiter(',');
  auto* sweep_seeds = app.add_subcommand("sweep-seeds", "Seed sensitivity");
  add_common(sweep_seeds);
  sweep_seeds->add_option("--ratio", ratio, "Label ratio");
  sweep_seeds->add_option("--seeds", num_seeds, "Number of seeds")->check(CLI::PositiveNumber);

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  double reference_cell = 0.05;
  auto* serve = app.add_subcommand("serve", "Serve the annotation endpoints");
  serve->add_option("--cloud", cloud_path, "Cloud to annotate")->required();
  serve->add_option("--ratio", ratio, "Candidate fraction");
  serve->add_option("--seed", seed, "Candidate sampling seed");
  serve->add_option("--classes", classes, "Class count when the cloud has none");
  serve->add_option("--reference-cell", reference_cell, "Grid cell of the context cloud (0: full cloud)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--out", out_path, "SQNL written on commit")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert) {
      write_cloud(read_cloud(in_path, classes), out_path);
    } else if (*gridsample) {
      const auto cloud = read_cloud(in_path);
      const auto result = grid_downsample(cloud, cell);
      write_cloud(result.sampled, out_path);
      std::printf("%lld -> %lld points\n", static_cast<long long>(cloud.size()),
                  static_cast<long long>(result.sampled.size()));
    } else if (*synth) {
      SceneSpec spec;
      spec.seed = seed;
      spec.colors = colors;
      if (!counts.empty()) spec.points_per_class = counts;
      write_cloud(synth_scene(spec), out_path);
    } else if (*label_sample) {
      const auto cloud = read_cloud(cloud_path);
      const auto labels = sample_sparse_labels(cloud, ratio, seed);
      export_label_file(labels, out_path);
      std::printf("%zu labels\n", labels.size());
    } else if (*train_cmd) {
      const auto config = read_config(config_path);
      const auto cloud = read_cloud(cloud_path);
      const auto labels = import_label_file(labels_path, cloud.size());
      const fs::path log_file = log_path.empty() ? sibling(out_path, "_log.csv") : fs::path(log_path);
      auto progress = [](const EpochLog& e, const Model&) {
        if (e.epoch % 10 == 0) std::fprintf(stderr, "epoch %d loss %.4f acc %.3f\n", e.epoch, e.loss, e.train_acc);
        return true;
      };
      TrainResult result;
      if (!resume_path.empty()) {
        result.model = read_model(resume_path, config);
        const int done = static_cast<int>(result.model.params.step / static_cast<std::uint64_t>(config.train.steps_per_epoch));
        result.log = continue_training(result.model, cloud, labels, config.train,
                                       std::max(0, config.train.epochs - done), progress);
      } else {
        result = train(cloud, labels, config.encoder, config.query, config.train, progress);
        if (should_retrain(config.train, labels)) {
          std::fprintf(stderr, "retraining on pseudo labels\n");
          auto second = retrain_with_pseudo(result.model, cloud, labels, config.encoder, config.query, config.train);
          write_file(sibling(log_file, "_retrain.csv"), format_train_log(second.log));
          result.model = std::move(second.model);
        }
      }
      write_file(log_file, format_train_log(result.log));
      save_checkpoint(result.model.params, out_path);
    } else if (*infer) {
      const auto config = read_config(config_path);
      const auto model = read_model(ckpt_path, config);
      const auto cloud = read_cloud(cloud_path);
      const auto predicted = queries_path.empty() ? predict(model, cloud)
                                                  : predict(model, cloud, read_cloud(queries_path).positions);
      write_file(out_path, format_prediction_file(predicted));
    } else if (*eval) {
      const auto cloud = read_cloud(cloud_path);
      std::vector<Label> predicted;
      if (!pred_path.empty()) {
        predicted = parse_prediction_file(read_file(pred_path));
      } else if (!ckpt_path.empty()) {
        predicted = predict(read_model(ckpt_path, read_config(config_path)), cloud);
      } else {
        throw ArgumentError("eval needs --ckpt or --pred");
      }
      const auto report = evaluate_predictions(cloud, predicted, radii);
      if (out_path.empty()) {
        std::cout << report.to_csv();
      } else {
        write_file(out_path, report.to_csv());
      }
    } else if (*sweep_ratio || *ablate || *sweep_k || *sweep_seeds) {
      const auto bench = make_benchmark(desk_scene(), read_config(config_path), bundle);
      ExperimentOptions options;
      options.threads = threads;
      if (*sweep_ratio) {
        write_experiment(degradation_sweep(bench, parse_doubles(ratio_list), options), out_dir);
      } else if (*ablate) {
        std::vector<std::uint64_t> seeds;
        for (int s = 0; s < num_seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        write_experiment(query_level_ablation(bench, ratio, default_level_subsets(), seeds, options), out_dir);
      } else if (*sweep_k) {
        write_experiment(k_sweep(bench, ratio, ks, options), out_dir);
      } else {
        const auto result = seed_sensitivity(bench, ratio, num_seeds, options);
        write_experiment(result, out_dir);
        std::vector<double> mious;
        for (const auto& c : result.cells) mious.push_back(c.miou);
        const auto stats = mean_std(mious);
        std::printf("miou mean=%.4f std=%.4f\n", stats.mean, stats.stddev);
      }
    } else if (*serve) {
      AnnotationOptions options;
      options.ratio = ratio;
      options.seed = seed;
      options.reference_cell = reference_cell;
      options.output = out_path;
      options.num_classes = classes;
      AnnotationService service(read_cloud(cloud_path, classes), options);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.serve(host, port, [](int bound) {
        std::printf("listening on port %d\n", bound);
        std::fflush(stdout);
      });
      g_service = nullptr;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
