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

#include "normadd/feature_bank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binary_io.hpp"
#include "normadd/errors.hpp"

namespace normadd {

namespace {

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

FeatureBank::FeatureBank(std::size_t dim, std::vector<float> entries,
                         double coreset_fraction, std::size_t source_count)
    : dim_(dim),
      entries_(std::move(entries)),
      coreset_fraction_(coreset_fraction),
      source_count_(source_count) {
  if (dim_ == 0) throw InvalidArgument("feature bank dim must be positive");
  if (entries_.empty() || entries_.size() % dim_ != 0) {
    throw InvalidArgument("feature bank storage is not a whole number of entries");
  }
  if (!(coreset_fraction_ > 0.0 && coreset_fraction_ <= 1.0)) {
    throw InvalidArgument("coreset fraction must lie in (0, 1]");
  }
  if (size() > source_count_) {
    throw InvalidArgument("feature bank has more entries than sources");
  }
}

std::span<const float> FeatureBank::entry(std::size_t i) const {
  return std::span<const float>(entries_).subspan(i * dim_, dim_);
}

double FeatureBank::nearest_distance(std::span<const float> query) const {
  if (query.size() != dim_) {
    throw InvalidArgument("bank query dim " + std::to_string(query.size()) +
                          " does not match bank dim " + std::to_string(dim_));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    best = std::min(best, squared_distance(query, entry(i)));
  }
  return std::sqrt(best);
}

std::size_t coreset_size(double fraction, std::size_t n) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("coreset fraction must lie in (0, 1]");
  }
  const auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

std::vector<std::size_t> greedy_k_center(std::span<const Embedding> points,
                                         std::size_t k) {
  const std::size_t n = points.size();
  if (n == 0) throw InvalidArgument("greedy_k_center: no points");
  if (k == 0 || k > n) throw InvalidArgument("greedy_k_center: k out of range");
  const std::size_t dim = points.front().dim();
  for (const auto& p : points) {
    if (p.dim() != dim) throw InvalidArgument("greedy_k_center: dimension mismatch");
  }

  std::vector<std::size_t> centres{0};
  centres.reserve(k);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = squared_distance(points[i].values(), points[0].values());
  }
  while (centres.size() < k) {
    std::size_t next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (nearest[i] > best) {
        best = nearest[i];
        next = i;
      }
    }
    centres.push_back(next);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i],
                            squared_distance(points[i].values(), points[next].values()));
    }
  }
  return centres;
}

FeatureBank build_bank(std::span<const Embedding> normal_patches,
                       double coreset_fraction) {
  if (normal_patches.empty()) throw InvalidArgument("build_bank: no input patches");
  if (!(coreset_fraction > 0.0 && coreset_fraction <= 1.0)) {
    throw InvalidArgument("build_bank: coreset fraction must lie in (0, 1]");
  }
  const std::size_t dim = normal_patches.front().dim();
  for (const auto& p : normal_patches) {
    if (p.dim() != dim) throw InvalidArgument("build_bank: dimension mismatch");
  }
  std::vector<std::size_t> keep;
  if (coreset_fraction == 1.0) {
    keep.resize(normal_patches.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  } else {
    keep = greedy_k_center(normal_patches,
                           coreset_size(coreset_fraction, normal_patches.size()));
  }
  std::vector<float> entries;
  entries.reserve(keep.size() * dim);
  for (auto i : keep) {
    auto v = normal_patches[i].values();
    entries.insert(entries.end(), v.begin(), v.end());
  }
  return FeatureBank(dim, std::move(entries), coreset_fraction, normal_patches.size());
}

namespace {

constexpr std::string_view kMagic = "NAFB";

}  // namespace

std::vector<std::uint8_t> encode_bank_file(const FeatureBank& bank) {
  if (bank.dim() > 0xffff || bank.size() > 0xffffffffULL ||
      bank.source_count() > 0xffffffffULL) {
    throw InvalidArgument("feature bank too large for the NAFB header");
  }
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u16(kBankFileVersion);
  w.u16(static_cast<std::uint16_t>(bank.dim()));
  w.u32(static_cast<std::uint32_t>(bank.size()));
  w.u32(static_cast<std::uint32_t>(bank.source_count()));
  w.f64(bank.coreset_fraction());
  for (std::size_t i = 0; i < bank.size(); ++i) w.f32s(bank.entry(i));
  return w.take();
}

FeatureBank decode_bank_file(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "NAFB");
  r.expect_magic(kMagic);
  r.expect_version(kBankFileVersion);
  const std::size_t dim = r.u16();
  const std::size_t count = r.u32();
  const std::size_t sources = r.u32();
  const double fraction = r.f64();
  if (dim == 0 || count == 0) {
    throw FormatError(FormatErrorKind::kDimensionMismatch, "bank has a zero extent");
  }
  if (!(fraction > 0.0 && fraction <= 1.0) || count > sources) {
    throw FormatError(FormatErrorKind::kInvalidValue, "bank header is inconsistent");
  }
  auto entries = r.f32s(count * dim);
  r.expect_end();
  for (float v : entries) {
    if (!std::isfinite(v)) throw FormatError(FormatErrorKind::kInvalidValue, "non-finite bank entry");
  }
  return FeatureBank(dim, std::move(entries), fraction, sources);
}

void write_bank_file(const FeatureBank& bank, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_bank_file(bank));
}

FeatureBank read_bank_file(const std::filesystem::path& path) {
  return decode_bank_file(detail::read_file_bytes(path));
}

}  // namespace normadd
