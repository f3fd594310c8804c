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

#include <string>

#include "sqn/error.hpp"
#include "sqn/trainer.hpp"

namespace sqn {
namespace {

TEST(RunConfig, DefaultsWhenEmpty) {
  const auto c = parse_run_config("# nothing\n\n");
  EXPECT_EQ(c.train.epochs, TrainConfig{}.epochs);
  EXPECT_EQ(c.query.k, 3);
  EXPECT_EQ(c.encoder.level_dims, EncoderConfig{}.level_dims);
}

TEST(RunConfig, ParsesEveryKind) {
  const auto c = parse_run_config(
      "encoder.dims = 4,8,16,32\n"
      "encoder.neighbors=6   # trailing comment\n"
      "query.k=5\n"
      "query.head=64,32\n"
      "query.levels=1,3\n"
      "train.epochs=7\n"
      "train.lr=0.002\n"
      "train.flip=off\n"
      "train.noise=no\n"
      "train.retrain=on\n"
      "train.class_weighting=false\n"
      "train.seed=42\n");
  EXPECT_EQ(c.encoder.level_dims, (std::array<int, 4>{4, 8, 16, 32}));
  EXPECT_EQ(c.encoder.neighbors, 6);
  EXPECT_EQ(c.query.k, 5);
  EXPECT_EQ(c.query.head_widths, (std::vector<int>{64, 32}));
  EXPECT_EQ(c.query.levels, (std::array<bool, 4>{true, false, true, false}));
  EXPECT_EQ(c.train.epochs, 7);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.002);
  EXPECT_FALSE(c.train.augment.flip);
  EXPECT_TRUE(c.train.augment.rotate);
  EXPECT_FALSE(c.train.augment.noise);
  EXPECT_EQ(c.train.retrain, RetrainMode::On);
  EXPECT_FALSE(c.train.class_weighting);
  EXPECT_EQ(c.train.seed, 42u);
}

TEST(RunConfig, FormatRoundTrips) {
  RunConfig c;
  c.encoder.level_dims = {2, 4, 6, 8};
  c.query.levels = {false, true, true, true};
  c.train.lr_decay = 0.975;
  c.train.retrain = RetrainMode::Off;
  const auto text = format_run_config(c);
  EXPECT_EQ(format_run_config(parse_run_config(text)), text);
}

TEST(RunConfig, ErrorsNameTheLine) {
  auto expect_line = [](const std::string& text, const std::string& needle) {
    try {
      parse_run_config(text);
      ADD_FAILURE() << "accepted " << text;
    } catch (const ArgumentError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_line("train.epochs=3\nbogus.key=1\n", "config line 2");
  expect_line("train.epochs=three\n", "config line 1");
  expect_line("train.flip=maybe\n", "config line 1");
  expect_line("\n\nno equals sign\n", "config line 3");
  expect_line("query.levels=0\n", "config line 1");
  expect_line("encoder.dims=1,2,3\n", "config line 1");
}

TEST(RunConfig, InvalidValuesRejected) {
  EXPECT_THROW(parse_run_config("query.k=0\n"), ArgumentError);
  EXPECT_THROW(parse_run_config("train.lr_decay=2\n"), ArgumentError);
}

}  // namespace
}  // namespace sqn
