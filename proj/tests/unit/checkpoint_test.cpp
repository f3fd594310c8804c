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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "sqn/error.hpp"
#include "sqn/parameters.hpp"

namespace sqn {
namespace {

Parameters<float> sample_params() {
  std::mt19937_64 rng(1);
  Parameters<float> p;
  p.add("enc.0.w", glorot_uniform<float>(10, 8, rng));
  p.add("enc.0.b", Matrix<float>::Zero(1, 8));
  p.add("head.w", glorot_uniform<float>(8, 3, rng));
  p.step = 1234;
  return p;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto p = sample_params();
  const auto bytes = encode_checkpoint(p);
  const auto q = decode_checkpoint(bytes);
  EXPECT_EQ(q.names(), p.names());
  EXPECT_EQ(q.step, 1234u);
  for (const auto& name : p.names()) EXPECT_TRUE(q.get(name).value() == p.get(name).value()) << name;
  EXPECT_EQ(encode_checkpoint(q), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "sqn_checkpoint_test.sqnw";
  const auto p = sample_params();
  save_checkpoint(p, path);
  EXPECT_EQ(encode_checkpoint(load_checkpoint(path)), encode_checkpoint(p));
  std::filesystem::remove(path);
}

TEST(Checkpoint, TruncationDetected) {
  const auto bytes = encode_checkpoint(sample_params());
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, bytes.size() - 1}) {
    EXPECT_THROW(decode_checkpoint(std::string_view(bytes).substr(0, cut)), FormatError) << cut;
  }
}

TEST(Checkpoint, BadMagicAndVersion) {
  auto bytes = encode_checkpoint(sample_params());
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes + "junk"), FormatError);
}

TEST(Checkpoint, MissingFile) { EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.sqnw"), IoError); }

}  // namespace
}  // namespace sqn
