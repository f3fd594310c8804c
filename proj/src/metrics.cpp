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

#include <charconv>
#include <cstdio>
#include <numeric>

#include "sqn/error.hpp"
#include "sqn/model.hpp"
#include "sqn/spatial_index.hpp"

namespace sqn {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {
  if (num_classes < 0) throw ArgumentError("negative class count");
}

std::size_t ConfusionMatrix::index(int truth, int predicted) const {
  if (truth < 0 || truth >= num_classes_ || predicted < 0 || predicted >= num_classes_) {
    throw ArgumentError("confusion entry (" + std::to_string(truth) + ", " +
                        std::to_string(predicted) + ") outside " + std::to_string(num_classes_) +
                        " classes");
  }
  return static_cast<std::size_t>(truth) * static_cast<std::size_t>(num_classes_) +
         static_cast<std::size_t>(predicted);
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void ConfusionMatrix::add(int truth, int predicted, std::uint64_t count) {
  counts_[index(truth, predicted)] += count;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) throw ArgumentError("merging confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::uint64_t ConfusionMatrix::false_positives(int c) const {
  std::uint64_t s = 0;
  for (int g = 0; g < num_classes_; ++g) s += g == c ? 0 : at(g, c);
  return s;
}

std::uint64_t ConfusionMatrix::false_negatives(int c) const {
  std::uint64_t s = 0;
  for (int p = 0; p < num_classes_; ++p) s += p == c ? 0 : at(c, p);
  return s;
}

ConfusionMatrix accumulate(std::span<const Label> truth, std::span<const Label> predicted,
                           int num_classes) {
  if (truth.size() != predicted.size()) {
    throw ArgumentError("ground truth has " + std::to_string(truth.size()) + " labels, prediction " +
                        std::to_string(predicted.size()));
  }
  if (truth.empty()) throw ArgumentError("cannot evaluate an empty prediction");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

ConfusionMatrix accumulate(const std::vector<Label>& truth, const std::vector<Label>& predicted,
                           int num_classes) {
  return accumulate(std::span<const Label>(truth), std::span<const Label>(predicted), num_classes);
}

double oa(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw ArgumentError("overall accuracy of an empty confusion matrix");
  std::uint64_t trace = 0;
  for (int c = 0; c < cm.num_classes(); ++c) trace += cm.at(c, c);
  return static_cast<double>(trace) / static_cast<double>(total);
}

double macc(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < cm.num_classes(); ++c) {
    const auto support = cm.true_positives(c) + cm.false_negatives(c);
    if (support == 0) continue;
    sum += static_cast<double>(cm.true_positives(c)) / static_cast<double>(support);
    ++present;
  }
  if (present == 0) throw ArgumentError("mean accuracy of an empty confusion matrix");
  return sum / present;
}

std::vector<std::optional<double>> per_class_iou(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(cm.num_classes()));
  for (int c = 0; c < cm.num_classes(); ++c) {
    const auto uni = cm.true_positives(c) + cm.false_positives(c) + cm.false_negatives(c);
    if (uni > 0) out[c] = static_cast<double>(cm.true_positives(c)) / static_cast<double>(uni);
  }
  return out;
}

double miou(const ConfusionMatrix& cm) {
  double sum = 0.0;
  int included = 0;
  for (const auto& iou : per_class_iou(cm)) {
    if (!iou) continue;
    sum += *iou;
    ++included;
  }
  if (included == 0) throw ArgumentError("mIoU of an empty confusion matrix");
  return sum / included;
}

std::vector<bool> boundary_mask(const PointCloud& cloud, double radius) {
  if (!cloud.labels) throw ArgumentError("boundary analysis needs ground-truth labels");
  if (!(radius > 0.0)) throw ArgumentError("boundary radius must be positive");
  std::vector<bool> mask(static_cast<std::size_t>(cloud.size()), false);
  if (cloud.size() == 0) return mask;
  const SpatialIndex index(cloud.positions);
  const auto& labels = *cloud.labels;
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index j : index.radius_neighbors(cloud.positions.row(i), radius)) {
      if (labels[j] != labels[i]) {
        mask[i] = true;
        break;
      }
    }
  }
  return mask;
}

std::string format_radius(double radius) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", radius);
  return buf;
}

std::optional<double> EvalReport::find(std::string_view metric, std::optional<int> cls) const {
  for (const auto& row : rows) {
    if (row.metric == metric && row.cls == cls) return row.value;
  }
  return std::nullopt;
}

std::string EvalReport::to_csv() const {
  std::string out = "metric,class,value\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.value);
    out += row.metric + "," + (row.cls ? std::to_string(*row.cls) : std::string()) + "," + buf + "\n";
  }
  return out;
}

EvalReport EvalReport::from_csv(std::string_view text) {
  using Kind = FormatError::Kind;
  EvalReport report;
  std::size_t pos = 0;
  std::int64_t line = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    const std::int64_t this_line = line++;
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "metric,class,value") {
        throw FormatError(Kind::MalformedHeader, -1, this_line, "expected header metric,class,value");
      }
      header_seen = true;
      continue;
    }
    const auto c1 = row.find(',');
    const auto c2 = row.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
      throw FormatError(Kind::BadRecord, -1, this_line, "expected three comma-separated fields");
    }
    MetricRow r;
    r.metric = std::string(row.substr(0, c1));
    const auto cls = row.substr(c1 + 1, c2 - c1 - 1);
    if (!cls.empty()) {
      int c = 0;
      auto [p, ec] = std::from_chars(cls.data(), cls.data() + cls.size(), c);
      if (ec != std::errc() || p != cls.data() + cls.size()) {
        throw FormatError(Kind::BadRecord, -1, this_line, "bad class field");
      }
      r.cls = c;
    }
    const auto value = row.substr(c2 + 1);
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), r.value);
    if (ec != std::errc() || p != value.data() + value.size()) {
      throw FormatError(Kind::BadRecord, -1, this_line, "bad value field");
    }
    report.rows.push_back(std::move(r));
  }
  return report;
}

namespace {

void append_metrics(EvalReport& report, const std::string& prefix, const ConfusionMatrix& cm) {
  report.rows.push_back({prefix + "oa", std::nullopt, oa(cm)});
  report.rows.push_back({prefix + "macc", std::nullopt, macc(cm)});
  report.rows.push_back({prefix + "miou", std::nullopt, miou(cm)});
  const auto ious = per_class_iou(cm);
  for (std::size_t c = 0; c < ious.size(); ++c) {
    if (ious[c]) report.rows.push_back({prefix + "iou", static_cast<int>(c), *ious[c]});
  }
}

}  // namespace

EvalReport evaluate_predictions(const PointCloud& cloud, std::span<const Label> predicted,
                                std::span<const double> boundary_radii) {
  if (!cloud.labels) throw ArgumentError("evaluation needs ground-truth labels");
  const auto& truth = *cloud.labels;
  EvalReport report;
  append_metrics(report, "", accumulate(truth, predicted, cloud.num_classes));
  for (double r : boundary_radii) {
    const auto mask = boundary_mask(cloud, r);
    ConfusionMatrix boundary(cloud.num_classes);
    ConfusionMatrix interior(cloud.num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      (mask[i] ? boundary : interior).add(truth[i], predicted[i]);
    }
    const std::string suffix = "@" + format_radius(r);
    report.rows.push_back({"boundary_fraction" + suffix, std::nullopt,
                           static_cast<double>(boundary.total()) / static_cast<double>(truth.size())});
    if (boundary.total() > 0) {
      report.rows.push_back({"boundary_oa" + suffix, std::nullopt, oa(boundary)});
      report.rows.push_back({"boundary_miou" + suffix, std::nullopt, miou(boundary)});
    }
    if (interior.total() > 0) {
      report.rows.push_back({"interior_oa" + suffix, std::nullopt, oa(interior)});
      report.rows.push_back({"interior_miou" + suffix, std::nullopt, miou(interior)});
    }
  }
  return report;
}

EvalReport eval_report(const Model& model, const PointCloud& cloud,
                       std::span<const double> boundary_radii) {
  const auto predicted = predict(model, cloud);
  return evaluate_predictions(cloud, predicted, boundary_radii);
}

}  // namespace sqn
