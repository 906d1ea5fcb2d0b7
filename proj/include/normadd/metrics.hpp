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

#include <span>

namespace normadd {

/// Image-level AUROC: the fraction of (positive, negative) pairs in which the
/// positive (label 1) outscores the negative, ties counted as 1/2. Computed
/// from midranks in O(n log n). Throws InvalidArgument on length mismatch,
/// labels other than 0/1, NaN scores, or when either class is absent.
double auroc(std::span<const double> scores, std::span<const int> labels);

}  // namespace normadd
