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

#include "sqn/binary_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "sqn/error.hpp"

namespace sqn {
namespace {

TEST(ByteIo, RoundTripsLittleEndianScalars) {
  ByteWriter w;
  w.u8(0xab);
  w.u16(0x1234);
  w.u32(0xdeadbeef);
  w.u64(0x0102030405060708ULL);
  w.f32(-1.5f);
  const std::string bytes = w.take();
  ASSERT_EQ(bytes.size(), 1u + 2 + 4 + 8 + 4);
  EXPECT_EQ(static_cast<unsigned char>(bytes[1]), 0x34);
  EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 0x12);

  ByteReader r(bytes);
  EXPECT_EQ(r.u8(), 0xab);
  EXPECT_EQ(r.u16(), 0x1234);
  EXPECT_EQ(r.u32(), 0xdeadbeefu);
  EXPECT_EQ(r.u64(), 0x0102030405060708ULL);
  EXPECT_EQ(r.f32(), -1.5f);
  EXPECT_EQ(r.remaining(), 0u);
}

TEST(ByteIo, ShortReadReportsOffset) {
  ByteReader r(std::string_view("\x01\x02\x03", 3));
  r.u16();
  try {
    r.u32();
    FAIL() << "expected a truncation error";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::Truncated);
    EXPECT_EQ(e.offset(), 2);
  }
}

TEST(ByteIo, MissingFileIsIoError) {
  EXPECT_THROW(read_file("/nonexistent/dir/file.bin"), IoError);
}

TEST(ByteIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "sqn_binary_io_test.bin";
  const std::string data("a\0b\xff", 4);
  write_file(path, data);
  EXPECT_EQ(read_file(path), data);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace sqn
