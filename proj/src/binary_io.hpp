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

// Little-endian byte buffers shared by the NAEB / NAAM / NAPJ / NAFB codecs.
// Private to the library.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "normadd/errors.hpp"

namespace normadd::detail {

class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void f32s(std::span<const float> values) {
    for (float v : values) f32(v);
  }

  const std::vector<std::uint8_t>& data() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked cursor. Running past the end is reported as a truncated
/// payload, which is the only way a well-formed header can fail to fit.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string_view format)
      : bytes_(bytes), format_(format) {}

  void expect_magic(std::string_view m) {
    if (bytes_.size() < m.size() ||
        std::memcmp(bytes_.data(), m.data(), m.size()) != 0) {
      throw FormatError(FormatErrorKind::kBadMagic,
                        std::string(format_) + " file does not start with '" +
                            std::string(m) + "'");
    }
    pos_ = m.size();
  }

  void expect_version(std::uint16_t expected) {
    const auto v = u16();
    if (v != expected) {
      throw FormatError(FormatErrorKind::kVersionMismatch,
                        std::string(format_) + " version " + std::to_string(v) +
                            ", expected " + std::to_string(expected));
    }
  }

  std::uint8_t u8() { return get_le<std::uint8_t>(); }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

  std::string string(std::size_t n) {
    need(n);
    std::string out(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return out;
  }

  std::vector<float> f32s(std::size_t n) {
    need(n * 4);
    std::vector<float> out(n);
    for (auto& v : out) v = f32();
    return out;
  }

  /// Checks that `n` more bytes are available without consuming them.
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(FormatErrorKind::kTruncatedPayload,
                        std::string(format_) + " needs " + std::to_string(n) +
                            " more bytes at offset " + std::to_string(pos_) +
                            ", " + std::to_string(bytes_.size() - pos_) +
                            " available");
    }
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void expect_end() const {
    if (remaining() != 0) {
      throw FormatError(FormatErrorKind::kDimensionMismatch,
                        std::string(format_) + " header accounts for " +
                            std::to_string(pos_) + " bytes but file holds " +
                            std::to_string(bytes_.size()));
    }
  }

 private:
  template <typename T>
  T get_le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::string_view format_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);

}  // namespace normadd::detail
