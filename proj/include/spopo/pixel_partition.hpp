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

#include "spopo/comb_model.hpp"

#include <vector>

namespace spopo {

// Half-open range of tooth indices [first, last).
struct ToothRange {
  int first = 0;
  int last = 0;

  int size() const { return last - first; }
  bool contains(int index) const { return index >= first && index < last; }
  bool operator==(const ToothRange&) const = default;
};

/// Contiguous spectral pixels as cut by the prism/slit filter.
struct PixelPartition {
  FrequencyGrid grid;
  std::vector<ToothRange> pixels;
  double resolution_m = 0.0;  // filter resolution (FWHM in wavelength)

  int size() const { return static_cast<int>(pixels.size()); }
  // Pixel holding `tooth`, or -1 when the tooth is outside the detected band.
  int pixel_of(int tooth) const;
};

// Default bound on |pixel power fraction - 1/M|.
inline constexpr double kPartitionPowerTolerance = 0.01;

// Per-tooth profile convolved with a normalized Gaussian of FWHM
// `resolution_m` (converted to frequency at the grid center).
Eigen::VectorXd smooth_profile(const FrequencyGrid& grid, const Eigen::VectorXd& values, double resolution_m);

// Intensity per tooth convolved with a Gaussian of FWHM `resolution_m`
// (converted to frequency at the grid center).
Eigen::VectorXd smoothed_intensity(const SpectralAmplitude& spectrum, double resolution_m);

/// Splits the signal teeth into `pixels` contiguous ranges of equal smoothed
/// power.  Boundaries snap to whole teeth, each at the tooth that minimizes
/// the cumulative-power error.
PixelPartition partition_equal_power(const SpectralAmplitude& spectrum, int pixels, double resolution_m);

// Fraction of the smoothed spectrum's power falling in each pixel.
Eigen::VectorXd pixel_power_fractions(const PixelPartition& partition, const SpectralAmplitude& spectrum);

}  // namespace spopo
