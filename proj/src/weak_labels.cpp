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

#include "sqn/weak_labels.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sqn/binary_io.hpp"
#include "sqn/error.hpp"
#include "sqn/model.hpp"
#include "sqn/sampling.hpp"

namespace sqn {

void SparseLabelSet::validate() const {
  if (indices.size() != labels.size()) {
    throw ArgumentError("label set has " + std::to_string(indices.size()) + " indices but " +
                        std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= num_points) {
      throw ArgumentError("label index " + std::to_string(indices[i]) + " outside [0, " +
                          std::to_string(num_points) + ")");
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw ArgumentError("label indices must be strictly increasing");
    }
    if (labels[i] >= num_classes) {
      throw ArgumentError("class " + std::to_string(labels[i]) + " is not below " +
                          std::to_string(num_classes));
    }
  }
}

SparseLabelSet sample_sparse_labels(const PointCloud& cloud, double ratio, std::uint64_t seed) {
  if (!cloud.labels) throw ArgumentError("sparse label sampling needs ground-truth labels");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ArgumentError("label ratio must be in (0, 1], got " + std::to_string(ratio));
  }
  const Index n = cloud.size();
  const auto count = static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
  if (count < 1) {
    throw ArgumentError("ratio " + std::to_string(ratio) + " of " + std::to_string(n) +
                        " points labels nothing");
  }
  SparseLabelSet set;
  set.indices = permutation_prefix(n, count, seed);
  std::sort(set.indices.begin(), set.indices.end());
  set.labels.reserve(set.indices.size());
  for (Index i : set.indices) set.labels.push_back((*cloud.labels)[i]);
  set.num_points = n;
  set.num_classes = cloud.num_classes;
  set.ratio = static_cast<double>(count) / static_cast<double>(n);
  set.seed = seed;
  return set;
}

SparseLabelSet dense_label_set(const std::vector<Label>& labels, int num_classes) {
  SparseLabelSet set;
  set.num_points = static_cast<Index>(labels.size());
  set.num_classes = num_classes;
  set.indices.resize(labels.size());
  std::iota(set.indices.begin(), set.indices.end(), Index{0});
  set.labels = labels;
  set.ratio = labels.empty() ? 0.0 : 1.0;
  set.validate();
  return set;
}

std::vector<std::size_t> label_histogram(const SparseLabelSet& labels, int num_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
  for (Label l : labels.labels) {
    if (l >= counts.size()) throw ArgumentError("class " + std::to_string(l) + " outside histogram");
    ++counts[l];
  }
  return counts;
}

std::vector<double> class_weights(const SparseLabelSet& labels, int num_classes) {
  const auto counts = label_histogram(labels, num_classes);
  std::vector<double> w(counts.size());
  double total = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    w[c] = 1.0 / std::sqrt(static_cast<double>(counts[c]) + 1.0);
    total += w[c];
  }
  const double mean = total / static_cast<double>(w.size());
  for (double& x : w) x /= mean;
  return w;
}

std::vector<Label> merge_pseudo_labels(std::vector<Label> predicted, const SparseLabelSet& annotated) {
  for (std::size_t i = 0; i < annotated.indices.size(); ++i) {
    const Index at = annotated.indices[i];
    if (at < 0 || at >= static_cast<Index>(predicted.size())) {
      throw ArgumentError("annotated index " + std::to_string(at) + " outside the prediction");
    }
    predicted[static_cast<std::size_t>(at)] = annotated.labels[i];
  }
  return predicted;
}

std::vector<Label> generate_pseudo_labels(const Model& model, const PointCloud& cloud,
                                          const SparseLabelSet& annotated) {
  return merge_pseudo_labels(predict(model, cloud), annotated);
}

std::string format_label_file(const SparseLabelSet& labels) {
  labels.validate();
  std::ostringstream out;
  out.precision(17);
  out << "SQNL 1 " << labels.num_points << ' ' << labels.num_classes << ' ' << labels.ratio << ' '
      << labels.seed << '\n';
  for (std::size_t i = 0; i < labels.indices.size(); ++i) {
    out << labels.indices[i] << ' ' << labels.labels[i] << '\n';
  }
  return out.str();
}

namespace {

template <typename T>
bool parse_number(std::string_view token, T& value) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

SparseLabelSet parse_label_file(std::string_view text, Index num_points, int num_classes) {
  using Kind = FormatError::Kind;
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  if (lines.empty()) throw FormatError(Kind::MalformedHeader, 0, 0, "empty label file, missing SQNL header");

  const auto header = split_ws(lines[0]);
  SparseLabelSet set;
  long long header_n = 0;
  int header_c = 0;
  if (header.size() != 6 || header[0] != "SQNL" || header[1] != "1" ||
      !parse_number(header[2], header_n) || !parse_number(header[3], header_c) ||
      !parse_number(header[4], set.ratio) || !parse_number(header[5], set.seed) || header_n < 0 ||
      header_c < 0) {
    throw FormatError(Kind::MalformedHeader, 0, 0,
                      "line 1: expected 'SQNL 1 <N> <C> <ratio> <seed>'");
  }
  if (num_points > 0 && header_n != num_points) {
    throw FormatError(Kind::MalformedHeader, 0, 0,
                      "line 1: file is for " + std::to_string(header_n) + " points, cloud has " +
                          std::to_string(num_points));
  }
  if (num_classes > 0 && header_c != num_classes) {
    throw FormatError(Kind::MalformedHeader, 0, 0,
                      "line 1: file has " + std::to_string(header_c) + " classes, expected " +
                          std::to_string(num_classes));
  }
  set.num_points = static_cast<Index>(header_n);
  set.num_classes = header_c;

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto fields = split_ws(lines[ln]);
    if (fields.empty()) continue;
    const auto line = static_cast<std::int64_t>(ln);
    const std::string where = "line " + std::to_string(ln + 1) + ": ";
    long long index = 0;
    long long label = 0;
    if (fields.size() != 2 || !parse_number(fields[0], index) || !parse_number(fields[1], label)) {
      throw FormatError(Kind::BadRecord, -1, line, where + "expected '<index> <class>'");
    }
    if (index < 0 || index >= set.num_points) {
      throw FormatError(Kind::BadRecord, -1, line,
                        where + "index " + std::to_string(index) + " outside [0, " +
                            std::to_string(set.num_points) + ")");
    }
    if (label < 0 || label >= set.num_classes) {
      throw FormatError(Kind::LabelOutOfRange, -1, line,
                        where + "class " + std::to_string(label) + " outside [0, " +
                            std::to_string(set.num_classes) + ")");
    }
    if (!set.indices.empty() && index <= set.indices.back()) {
      throw FormatError(Kind::BadRecord, -1, line, where + "indices must be strictly ascending");
    }
    set.indices.push_back(static_cast<Index>(index));
    set.labels.push_back(static_cast<Label>(label));
  }
  return set;
}

std::string format_prediction_file(const std::vector<Label>& predicted) {
  std::string out = "SQNP 1 " + std::to_string(predicted.size()) + "\n";
  for (Label l : predicted) {
    out += std::to_string(l);
    out += '\n';
  }
  return out;
}

std::vector<Label> parse_prediction_file(std::string_view text) {
  using Kind = FormatError::Kind;
  std::vector<Label> out;
  std::size_t pos = 0;
  std::int64_t line = 0;
  long long expected = -1;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto fields = split_ws(text.substr(pos, end - pos));
    pos = end + 1;
    const std::int64_t this_line = line++;
    if (expected < 0) {
      if (fields.size() != 3 || fields[0] != "SQNP" || fields[1] != "1" || !parse_number(fields[2], expected) ||
          expected < 0) {
        throw FormatError(Kind::MalformedHeader, 0, 0, "line 1: expected 'SQNP 1 <count>'");
      }
      continue;
    }
    if (fields.empty()) continue;
    unsigned value = 0;
    if (fields.size() != 1 || !parse_number(fields[0], value) || value > 0xffff) {
      throw FormatError(Kind::BadRecord, -1, this_line,
                        "line " + std::to_string(this_line + 1) + ": expected one class id");
    }
    out.push_back(static_cast<Label>(value));
  }
  if (expected < 0) throw FormatError(Kind::MalformedHeader, 0, 0, "empty prediction file");
  if (static_cast<long long>(out.size()) != expected) {
    throw FormatError(Kind::Truncated, -1, static_cast<std::int64_t>(out.size()),
                      "header announces " + std::to_string(expected) + " predictions, found " +
                          std::to_string(out.size()));
  }
  return out;
}

void export_label_file(const SparseLabelSet& labels, const std::filesystem::path& path) {
  write_file(path, format_label_file(labels));
}

SparseLabelSet import_label_file(const std::filesystem::path& path, Index num_points, int num_classes) {
  return parse_label_file(read_file(path), num_points, num_classes);
}

}  // namespace sqn
