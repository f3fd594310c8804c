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

#include "sqn/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

#include "sqn/binary_io.hpp"
#include "sqn/error.hpp"

namespace sqn {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFlagColors = 0x1;
constexpr std::uint8_t kFlagLabels = 0x2;
constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 2 + 8;

FormatError truncated(std::size_t offset, std::uint64_t record, const char* block) {
  return FormatError(FormatError::Kind::Truncated, static_cast<std::int64_t>(offset),
                     static_cast<std::int64_t>(record),
                     std::string("truncated ") + block + " block at record " +
                         std::to_string(record) + " (byte offset " +
                         std::to_string(offset) + ")");
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".sqnc" ? CloudFormat::Binary : CloudFormat::AsciiXyz;
}

std::string encode_sqnc(const PointCloud& cloud) {
  cloud.validate();
  const auto n = static_cast<std::uint64_t>(cloud.size());
  ByteWriter w;
  w.bytes("SQNC", 4);
  w.u8(kVersion);
  std::uint8_t flags = 0;
  if (cloud.colors) flags |= kFlagColors;
  if (cloud.labels) flags |= kFlagLabels;
  w.u8(flags);
  w.u16(static_cast<std::uint16_t>(cloud.num_classes));
  w.u64(n);
  for (Index i = 0; i < cloud.size(); ++i) {
    for (int d = 0; d < 3; ++d) w.f32(cloud.positions(i, d));
  }
  if (cloud.colors) {
    for (Index i = 0; i < cloud.size(); ++i) {
      for (int d = 0; d < 3; ++d) w.u8((*cloud.colors)(i, d));
    }
  }
  if (cloud.labels) {
    for (Label l : *cloud.labels) w.u16(l);
  }
  return w.take();
}

PointCloud decode_sqnc(std::string_view bytes) {
  using Kind = FormatError::Kind;
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(Kind::MalformedHeader, static_cast<std::int64_t>(bytes.size()), -1,
                      "SQNC header needs " + std::to_string(kHeaderBytes) + " bytes, got " +
                          std::to_string(bytes.size()));
  }
  ByteReader r(bytes);
  if (bytes.substr(0, 4) != "SQNC") {
    throw FormatError(Kind::MalformedHeader, 0, -1, "bad magic, expected SQNC");
  }
  r.skip(4);
  const auto version = r.u8();
  if (version != kVersion) {
    throw FormatError(Kind::MalformedHeader, 4, -1,
                      "unsupported SQNC version " + std::to_string(version));
  }
  const auto flags = r.u8();
  if (flags & ~(kFlagColors | kFlagLabels)) {
    throw FormatError(Kind::MalformedHeader, 5, -1,
                      "unknown SQNC flag bits " + std::to_string(flags));
  }
  PointCloud cloud;
  cloud.num_classes = r.u16();
  const std::uint64_t n = r.u64();

  const std::size_t positions_at = r.offset();
  const std::size_t available = bytes.size() - positions_at;
  if (n > available / 12) throw truncated(positions_at + (available / 12) * 12, available / 12, "position");
  const auto rows = static_cast<Index>(n);
  cloud.positions.resize(rows, 3);
  for (Index i = 0; i < rows; ++i) {
    for (int d = 0; d < 3; ++d) cloud.positions(i, d) = r.f32();
  }
  if (flags & kFlagColors) {
    const std::size_t at = r.offset();
    const std::size_t left = bytes.size() - at;
    if (n > left / 3) throw truncated(at + (left / 3) * 3, left / 3, "color");
    Colors colors(rows, 3);
    for (Index i = 0; i < rows; ++i) {
      for (int d = 0; d < 3; ++d) colors(i, d) = r.u8();
    }
    cloud.colors = std::move(colors);
  }
  if (flags & kFlagLabels) {
    const std::size_t at = r.offset();
    const std::size_t left = bytes.size() - at;
    if (n > left / 2) throw truncated(at + (left / 2) * 2, left / 2, "label");
    std::vector<Label> labels(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::size_t label_at = r.offset();
      labels[i] = r.u16();
      if (labels[i] >= cloud.num_classes) {
        throw FormatError(Kind::LabelOutOfRange, static_cast<std::int64_t>(label_at),
                          static_cast<std::int64_t>(i),
                          "label " + std::to_string(labels[i]) + " at record " +
                              std::to_string(i) + " is not below num_classes " +
                              std::to_string(cloud.num_classes));
      }
    }
    cloud.labels = std::move(labels);
  }
  if (r.offset() != bytes.size()) {
    throw FormatError(Kind::BadRecord, static_cast<std::int64_t>(r.offset()), -1,
                      std::to_string(bytes.size() - r.offset()) + " trailing bytes after payload");
  }
  if (!cloud.positions.allFinite()) {
    throw FormatError(Kind::BadRecord, static_cast<std::int64_t>(positions_at), -1,
                      "non-finite position in payload");
  }
  return cloud;
}

PointCloud parse_ascii_xyz(std::string_view text, int num_classes) {
  using Kind = FormatError::Kind;
  std::vector<float> xyz;
  std::vector<std::uint8_t> rgb;
  std::vector<Label> labels;
  int fields_per_line = -1;
  std::int64_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const std::int64_t this_line = line_no++;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<double> values;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + j, v);
      if (ec != std::errc() || ptr != line.data() + j) {
        throw FormatError(Kind::BadRecord, -1, this_line,
                          "line " + std::to_string(this_line + 1) + ": cannot parse '" +
                              std::string(line.substr(i, j - i)) + "'");
      }
      values.push_back(v);
      i = j;
    }
    if (values.empty()) continue;
    const int nf = static_cast<int>(values.size());
    if (nf != 3 && nf != 4 && nf != 6 && nf != 7) {
      throw FormatError(Kind::BadRecord, -1, this_line,
                        "line " + std::to_string(this_line + 1) + ": expected 3, 4, 6 or 7 fields, got " +
                            std::to_string(nf));
    }
    if (fields_per_line < 0) fields_per_line = nf;
    if (nf != fields_per_line) {
      throw FormatError(Kind::BadRecord, -1, this_line,
                        "line " + std::to_string(this_line + 1) + ": " + std::to_string(nf) +
                            " fields, earlier lines have " + std::to_string(fields_per_line));
    }
    for (int d = 0; d < 3; ++d) xyz.push_back(static_cast<float>(values[d]));
    if (nf >= 6) {
      for (int d = 3; d < 6; ++d) {
        if (values[d] < 0 || values[d] > 255 || values[d] != std::floor(values[d])) {
          throw FormatError(Kind::BadRecord, -1, this_line,
                            "line " + std::to_string(this_line + 1) + ": color out of 0..255");
        }
        rgb.push_back(static_cast<std::uint8_t>(values[d]));
      }
    }
    if (nf == 4 || nf == 7) {
      const double l = values.back();
      if (l < 0 || l > 65535 || l != std::floor(l)) {
        throw FormatError(Kind::BadRecord, -1, this_line,
                          "line " + std::to_string(this_line + 1) + ": label is not a class id");
      }
      if (num_classes > 0 && l >= num_classes) {
        throw FormatError(Kind::LabelOutOfRange, -1, this_line,
                          "line " + std::to_string(this_line + 1) + ": label " +
                              std::to_string(static_cast<int>(l)) + " is not below num_classes " +
                              std::to_string(num_classes));
      }
      labels.push_back(static_cast<Label>(l));
    }
  }

  PointCloud cloud;
  const auto n = static_cast<Index>(xyz.size() / 3);
  cloud.positions = Eigen::Map<const Positions>(xyz.data(), n, 3);
  if (!cloud.positions.allFinite()) {
    throw FormatError(Kind::BadRecord, -1, -1, "non-finite coordinate in ASCII input");
  }
  if (fields_per_line >= 6) cloud.colors = Eigen::Map<const Colors>(rgb.data(), n, 3);
  if (fields_per_line == 4 || fields_per_line == 7) {
    int c = num_classes;
    if (c <= 0) c = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    cloud.num_classes = c;
    cloud.labels = std::move(labels);
  } else {
    cloud.num_classes = std::max(num_classes, 0);
  }
  return cloud;
}

std::string format_ascii_xyz(const PointCloud& cloud) {
  cloud.validate();
  std::ostringstream out;
  out.precision(9);
  out << "# x y z" << (cloud.colors ? " r g b" : "") << (cloud.labels ? " label" : "") << '\n';
  for (Index i = 0; i < cloud.size(); ++i) {
    out << cloud.positions(i, 0) << ' ' << cloud.positions(i, 1) << ' ' << cloud.positions(i, 2);
    if (cloud.colors) {
      for (int d = 0; d < 3; ++d) out << ' ' << static_cast<int>((*cloud.colors)(i, d));
    }
    if (cloud.labels) out << ' ' << (*cloud.labels)[i];
    out << '\n';
  }
  return out.str();
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format, int num_classes) {
  const std::string bytes = read_file(path);
  return format == CloudFormat::Binary ? decode_sqnc(bytes) : parse_ascii_xyz(bytes, num_classes);
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  write_file(path, format == CloudFormat::Binary ? encode_sqnc(cloud) : format_ascii_xyz(cloud));
}

}  // namespace sqn
