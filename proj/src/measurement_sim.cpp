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

#include "spopo/measurement_sim.hpp"

#include "spopo/errors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace spopo {

std::string IntervalId::label() const {
  if (first == last) return std::to_string(first + 1);
  return std::to_string(first + 1) + "-" + std::to_string(last + 1);
}

IntervalId IntervalId::parse(const std::string& text) {
  try {
    std::size_t used = 0;
    const int a = std::stoi(text, &used);
    if (used == text.size()) {
      if (a < 1) throw std::invalid_argument("pixel numbers start at 1");
      return {a - 1, a - 1};
    }
    if (text[used] != '-') throw std::invalid_argument("bad separator");
    std::size_t used2 = 0;
    const std::string rest = text.substr(used + 1);
    const int b = std::stoi(rest, &used2);
    if (used2 != rest.size() || a < 1 || b < a) throw std::invalid_argument("bad range");
    return {a - 1, b - 1};
  } catch (const std::exception&) {
    throw FormatError("malformed interval id '" + text + "'");
  }
}

std::vector<IntervalId> enumerate_intervals(int pixels) {
  if (pixels < 1) throw std::invalid_argument("pixel count must be at least 1");
  std::vector<IntervalId> out;
  out.reserve(static_cast<std::size_t>(pixels * (pixels + 1) / 2));
  for (int length = 1; length <= pixels; ++length) {
    for (int first = 0; first + length <= pixels; ++first) out.push_back({first, first + length - 1});
  }
  return out;
}

IntervalExpectation interval_variance_expectation(const PhotonCovariance& photons, const IntervalId& interval) {
  if (interval.first < 0 || interval.last >= photons.dimension() || interval.last < interval.first) {
    throw std::invalid_argument("interval " + interval.label() + " lies outside the pixel range");
  }
  IntervalExpectation e;
  const int len = interval.size();
  e.noise = photons.covariance.block(interval.first, interval.first, len, len).sum();
  e.shot = photons.mean_photons.segment(interval.first, len).sum();
  return e;
}

void validate_record(const MeasurementRecord& record) {
  if (record.noise.size() != record.shot.size()) {
    throw FormatError("interval " + record.interval.label() + ": noise and shot sample counts differ");
  }
  for (std::size_t i = 0; i < record.noise.size(); ++i) {
    if (!(record.noise[i] > 0.0) || !(record.shot[i] > 0.0)) {
      throw FormatError("interval " + record.interval.label() + ": variance samples must be positive");
    }
  }
}

MeasurementRecord simulate_variance_samples(const IntervalExpectation& expectation, const IntervalId& interval,
                                            int sample_count, std::uint64_t seed, const EstimatorModel& model) {
  if (sample_count < 2) throw std::invalid_argument("need at least 2 samples per interval");
  const double noise = expectation.noise + model.dark_offset;
  const double shot = expectation.shot + model.dark_offset;
  if (!(noise > 0.0) || !(shot > 0.0)) throw std::invalid_argument("variance expectations must be positive");
  if (!(model.effective_averages > 0.0)) throw std::invalid_argument("effective averaging number must be positive");

  MeasurementRecord r;
  r.interval = interval;
  r.noise.resize(static_cast<std::size_t>(sample_count));
  r.shot.resize(static_cast<std::size_t>(sample_count));
  if (std::isinf(model.effective_averages)) {
    std::fill(r.noise.begin(), r.noise.end(), noise);
    std::fill(r.shot.begin(), r.shot.end(), shot);
    return r;
  }
  std::mt19937_64 rng(seed);
  std::chi_squared_distribution<double> chi2(model.effective_averages);
  const double nu = model.effective_averages;
  for (std::size_t i = 0; i < r.noise.size(); ++i) {
    // chi2 draws are positive with probability one; guard the measure-zero case.
    r.noise[i] = noise * std::max(chi2(rng), 1e-300) / nu;
    r.shot[i] = shot * std::max(chi2(rng), 1e-300) / nu;
  }
  return r;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over master + golden-ratio-spaced stream offsets
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<MeasurementRecord> simulate_records(const PhotonCovariance& photons, int sample_count,
                                                std::uint64_t master_seed, const EstimatorModel& model) {
  const auto intervals = enumerate_intervals(static_cast<int>(photons.dimension()));
  std::vector<MeasurementRecord> out;
  out.reserve(intervals.size());
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    out.push_back(simulate_variance_samples(interval_variance_expectation(photons, intervals[k]), intervals[k],
                                            sample_count, derive_seed(master_seed, k), model));
  }
  return out;
}

}  // namespace spopo
