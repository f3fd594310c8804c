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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sqn {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Tensor operands with incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A file or payload that does not follow its format contract.
///
/// `offset` is the byte offset (binary formats) and `record` the 0-based
/// record or line index where the problem was detected; either may be -1
/// when it does not apply.
class FormatError : public Error {
 public:
  enum class Kind { MalformedHeader, Truncated, LabelOutOfRange, BadRecord };

  FormatError(Kind kind, std::int64_t offset, std::int64_t record,
              const std::string& what)
      : Error(what), kind_(kind), offset_(offset), record_(record) {}

  Kind kind() const { return kind_; }
  std::int64_t offset() const { return offset_; }
  std::int64_t record() const { return record_; }

 private:
  Kind kind_;
  std::int64_t offset_;
  std::int64_t record_;
};

}  // namespace sqn
