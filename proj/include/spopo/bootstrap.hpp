// Copyright 2026 The spopo-twin Authors
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

#include "spopo/reconstruction.hpp"

namespace spopo {

struct BootstrapOptions {
  int resamples = 10'000;
  std::uint64_t seed = 0;
  ResampleMode mode = ResampleMode::per_point;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Resamples the per-point data with replacement (or, in element mode, picks a
/// single data point per interval), reruns the reconstruction, and rotates
/// each resampled V into the eigenbasis of `report`.  Resample r draws from
/// derive_seed(seed, r) and results are reduced in resample order, so the
/// outcome does not depend on the thread count.
///
/// Returns `report` with uncertainty attached to every mode.
EigenmodeReport bootstrap(std::span<const MeasurementRecord> records, EigenmodeReport report,
                          const BootstrapOptions& options);

}  // namespace spopo
