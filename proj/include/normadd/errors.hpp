// Copyright 2026 The normadd Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace normadd {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition: dimension mismatch, zero-norm vector, empty input.
/// These indicate a bug in the caller rather than a data condition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  kBadMagic,
  kVersionMismatch,
  kTruncatedPayload,
  kDimensionMismatch,
  kInvalidValue,
  kIo,
};

std::string_view to_string(FormatErrorKind kind);

/// Failure to parse or write one of the binary file formats.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// Evaluation-protocol failure (unknown class/group, degenerate scenario).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// An encoder or phrase source could not produce a result.
class EncoderError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unresolvable configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace normadd
