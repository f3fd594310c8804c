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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "sqn/binary_io.hpp"
#include "sqn/error.hpp"
#include "sqn/trainer.hpp"

namespace sqn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ArgumentError("bad number '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ArgumentError("bad boolean '" + std::string(v) + "'");
}

std::vector<int> parse_int_list(std::string_view v) {
  std::vector<int> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_value<int>(trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

template <std::size_t N>
std::array<int, N> parse_int_array(std::string_view v) {
  const auto list = parse_int_list(v);
  if (list.size() != N) throw ArgumentError("expected " + std::to_string(N) + " comma-separated values");
  std::array<int, N> out{};
  std::copy(list.begin(), list.end(), out.begin());
  return out;
}

std::string join(const auto& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"encoder.dims", [](RunConfig& c, std::string_view v) { c.encoder.level_dims = parse_int_array<kNumLevels>(v); }},
      {"encoder.decimation", [](RunConfig& c, std::string_view v) { c.encoder.decimation = parse_int_array<kNumLevels>(v); }},
      {"encoder.neighbors", [](RunConfig& c, std::string_view v) { c.encoder.neighbors = parse_value<int>(v); }},
      {"encoder.seed", [](RunConfig& c, std::string_view v) { c.encoder.seed = parse_value<std::uint64_t>(v); }},
      {"query.k", [](RunConfig& c, std::string_view v) { c.query.k = parse_value<int>(v); }},
      {"query.head", [](RunConfig& c, std::string_view v) { c.query.head_widths = parse_int_list(v); }},
      {"query.power", [](RunConfig& c, std::string_view v) { c.query.distance_power = parse_value<double>(v); }},
      {"query.epsilon", [](RunConfig& c, std::string_view v) { c.query.epsilon = parse_value<double>(v); }},
      {"query.levels",
       [](RunConfig& c, std::string_view v) {
         c.query.levels.fill(false);
         for (int l : parse_int_list(v)) {
           if (l < 1 || l > kNumLevels) throw ArgumentError("query level " + std::to_string(l) + " outside 1..4");
           c.query.levels[static_cast<std::size_t>(l - 1)] = true;
         }
       }},
      {"train.epochs", [](RunConfig& c, std::string_view v) { c.train.epochs = parse_value<int>(v); }},
      {"train.steps_per_epoch", [](RunConfig& c, std::string_view v) { c.train.steps_per_epoch = parse_value<int>(v); }},
      {"train.queries_per_step", [](RunConfig& c, std::string_view v) { c.train.queries_per_step = parse_value<int>(v); }},
      {"train.lr", [](RunConfig& c, std::string_view v) { c.train.learning_rate = parse_value<double>(v); }},
      {"train.lr_decay", [](RunConfig& c, std::string_view v) { c.train.lr_decay = parse_value<double>(v); }},
      {"train.flip", [](RunConfig& c, std::string_view v) { c.train.augment.flip = parse_bool(v); }},
      {"train.rotate", [](RunConfig& c, std::string_view v) { c.train.augment.rotate = parse_bool(v); }},
      {"train.noise", [](RunConfig& c, std::string_view v) { c.train.augment.noise = parse_bool(v); }},
      {"train.noise_sigma", [](RunConfig& c, std::string_view v) { c.train.augment.noise_sigma = parse_value<double>(v); }},
      {"train.noise_clip", [](RunConfig& c, std::string_view v) { c.train.augment.noise_clip = parse_value<double>(v); }},
      {"train.seed", [](RunConfig& c, std::string_view v) { c.train.seed = parse_value<std::uint64_t>(v); }},
      {"train.retrain",
       [](RunConfig& c, std::string_view v) {
         if (v == "auto") c.train.retrain = RetrainMode::Auto;
         else if (v == "on") c.train.retrain = RetrainMode::On;
         else if (v == "off") c.train.retrain = RetrainMode::Off;
         else throw ArgumentError("retrain must be auto, on or off");
       }},
      {"train.class_weighting", [](RunConfig& c, std::string_view v) { c.train.class_weighting = parse_bool(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ArgumentError(where + "expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ArgumentError(where + "unknown key '" + std::string(key) + "'");
    try {
      it->second(config, value);
    } catch (const Error& e) {
      throw ArgumentError(where + e.what());
    }
  }
  config.encoder.validate();
  config.query.validate();
  config.train.validate();
  return config;
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  std::vector<int> levels;
  for (int l = 0; l < kNumLevels; ++l) {
    if (c.query.levels[static_cast<std::size_t>(l)]) levels.push_back(l + 1);
  }
  const char* retrain = c.train.retrain == RetrainMode::Auto ? "auto" : c.train.retrain == RetrainMode::On ? "on" : "off";
  out << "encoder.dims=" << join(c.encoder.level_dims) << '\n'
      << "encoder.decimation=" << join(c.encoder.decimation) << '\n'
      << "encoder.neighbors=" << c.encoder.neighbors << '\n'
      << "encoder.seed=" << c.encoder.seed << '\n'
      << "query.k=" << c.query.k << '\n'
      << "query.head=" << join(c.query.head_widths) << '\n'
      << "query.power=" << c.query.distance_power << '\n'
      << "query.epsilon=" << c.query.epsilon << '\n'
      << "query.levels=" << join(levels) << '\n'
      << "train.epochs=" << c.train.epochs << '\n'
      << "train.steps_per_epoch=" << c.train.steps_per_epoch << '\n'
      << "train.queries_per_step=" << c.train.queries_per_step << '\n'
      << "train.lr=" << c.train.learning_rate << '\n'
      << "train.lr_decay=" << c.train.lr_decay << '\n'
      << "train.flip=" << c.train.augment.flip << '\n'
      << "train.rotate=" << c.train.augment.rotate << '\n'
      << "train.noise=" << c.train.augment.noise << '\n'
      << "train.noise_sigma=" << c.train.augment.noise_sigma << '\n'
      << "train.noise_clip=" << c.train.augment.noise_clip << '\n'
      << "train.seed=" << c.train.seed << '\n'
      << "train.retrain=" << retrain << '\n'
      << "train.class_weighting=" << c.train.class_weighting << '\n';
  return out.str();
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path)); }

}  // namespace sqn
