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

#include <filesystem>
#include <string>
#include <string_view>

#include "sqn/point_cloud.hpp"

namespace sqn {

// SQNC v1 layout (little-endian):
//   "SQNC" | u8 version=1 | u8 flags (bit0 colors, bit1 labels) | u16 num_classes
//   | u64 N | N*3 f32 positions | [N*3 u8 colors] | [N u16 labels]
//
// ASCII XYZ: one point per line, "x y z [r g b] [label]", '#' starts a
// comment. Every data line must carry the same number of fields.

enum class CloudFormat { Binary, AsciiXyz };

/// Guesses the format from the extension: ".sqnc" is binary, anything else ASCII.
CloudFormat format_from_path(const std::filesystem::path& path);

/// `num_classes` is only consulted for ASCII input; 0 derives it from the
/// largest label present.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format,
                      int num_classes = 0);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                CloudFormat format);

std::string encode_sqnc(const PointCloud& cloud);
PointCloud decode_sqnc(std::string_view bytes);

PointCloud parse_ascii_xyz(std::string_view text, int num_classes = 0);
std::string format_ascii_xyz(const PointCloud& cloud);

}  // namespace sqn
