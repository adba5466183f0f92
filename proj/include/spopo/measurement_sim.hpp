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

#include "spopo/gaussian_state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spopo {

// Contiguous run of pixels [first, last], zero-based and inclusive.
struct IntervalId {
  int first = 0;
  int last = 0;

  int size() const { return last - first + 1; }
  bool contains(int pixel) const { return pixel >= first && pixel <= last; }
  // One-based text form: "2" or "1-3".
  std::string label() const;
  static IntervalId parse(const std::string& text);

  bool operator==(const IntervalId&) const = default;
  auto operator<=>(const IntervalId&) const = default;
};

// All contiguous runs: singletons first, then pairs, ..., then the full span.
std::vector<IntervalId> enumerate_intervals(int pixels);

struct IntervalExpectation {
  double noise = 0.0;  // sum of cov(n_i, n_j) over the interval
  double shot = 0.0;   // sum of <n_i> over the interval
};

IntervalExpectation interval_variance_expectation(const PhotonCovariance& photons, const IntervalId& interval);

/// Per-point variance estimates for one interval, as read off the spectrum
/// analyzer: noise samples (sum photocurrent) and shot samples (difference).
struct MeasurementRecord {
  IntervalId interval;
  std::vector<double> noise;
  std::vector<double> shot;

  std::size_t sample_count() const { return noise.size(); }
};

void validate_record(const MeasurementRecord& record);

/// Scaled chi-square estimator: each point is expectation * chi2(nu) / nu.
/// An infinite `effective_averages` yields noiseless points.
struct EstimatorModel {
  double effective_averages = 20.0;
  double dark_offset = 0.0;  // added to both expectations before sampling
};

MeasurementRecord simulate_variance_samples(const IntervalExpectation& expectation, const IntervalId& interval,
                                            int sample_count, std::uint64_t seed, const EstimatorModel& model = {});

// Seed of an independent stream `stream` derived from `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// One record per contiguous interval; record k uses derive_seed(master, k).
std::vector<MeasurementRecord> simulate_records(const PhotonCovariance& photons, int sample_count,
                                                std::uint64_t master_seed, const EstimatorModel& model = {});

}  // namespace spopo
