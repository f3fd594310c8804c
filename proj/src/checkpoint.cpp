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
#include "sqn/parameters.hpp"

namespace sqn {

namespace {
constexpr std::uint8_t kVersion = 1;
}

std::string encode_checkpoint(const Parameters<float>& params) {
  ByteWriter w;
  w.bytes("SQNW", 4);
  w.u8(kVersion);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, slot] : params.slots()) {
    if (name.size() > 0xffff) throw ArgumentError("parameter name too long: " + name);
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    const auto& v = slot.value.value();
    w.u8(2);
    w.u64(static_cast<std::uint64_t>(v.rows()));
    w.u64(static_cast<std::uint64_t>(v.cols()));
    for (Eigen::Index i = 0; i < v.size(); ++i) w.f32(v.data()[i]);
  }
  w.u64(params.step);
  return w.take();
}

Parameters<float> decode_checkpoint(std::string_view bytes) {
  using Kind = FormatError::Kind;
  ByteReader r(bytes);
  if (r.bytes(std::min<std::size_t>(4, bytes.size())) != "SQNW") {
    throw FormatError(Kind::MalformedHeader, 0, -1, "bad magic, expected SQNW");
  }
  const auto version = r.u8();
  if (version != kVersion) {
    throw FormatError(Kind::MalformedHeader, 4, -1,
                      "unsupported SQNW version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  Parameters<float> params;
  for (std::uint32_t p = 0; p < count; ++p) {
    const std::size_t at = r.offset();
    const std::uint16_t len = r.u16();
    const std::string name(r.bytes(len));
    const std::uint8_t rank = r.u8();
    if (rank < 1 || rank > 2) {
      throw FormatError(Kind::BadRecord, static_cast<std::int64_t>(at), p,
                        "parameter '" + name + "' has unsupported rank " + std::to_string(rank));
    }
    std::uint64_t dims[2] = {1, 1};
    for (int d = 0; d < rank; ++d) dims[rank == 1 ? 1 : d] = r.u64();
    if (dims[0] * dims[1] > r.remaining() / 4) {
      throw FormatError(Kind::Truncated, static_cast<std::int64_t>(r.offset()), p,
                        "parameter '" + name + "' data runs past end of file");
    }
    Matrix<float> v(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = r.f32();
    if (params.contains(name)) {
      throw FormatError(Kind::BadRecord, static_cast<std::int64_t>(at), p,
                        "duplicate parameter '" + name + "'");
    }
    params.add(name, std::move(v));
  }
  params.step = r.u64();
  if (r.remaining() != 0) {
    throw FormatError(Kind::BadRecord, static_cast<std::int64_t>(r.offset()), -1,
                      "trailing bytes after checkpoint");
  }
  return params;
}

void save_checkpoint(const Parameters<float>& params, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(params));
}

Parameters<float> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace sqn
