// Copyright 2026 The CCQ Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCQ_ERROR_HPP_
#define CCQ_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ccq {

// Base class so callers can catch anything raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid encoding configuration, family, or option combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A value is outside the range an operation accepts (code out of range,
// negative scale, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Tensor or vector dimensions do not fit the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Inputs cannot be represented in the requested bit layout (invalid state
// transition, overlong code, scale code overflow, ...).
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Malformed serialized data. Carries the byte offset where parsing failed
// when one is known (offset() < 0 otherwise).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, long long offset = -1)
      : Error(offset >= 0 ? what + " (byte offset " + std::to_string(offset) + ")" : what),
        offset_(offset) {}

  long long offset() const { return offset_; }

 private:
  long long offset_;
};

}  // namespace ccq

#endif  // CCQ_ERROR_HPP_
