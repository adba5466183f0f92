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

#include "spopo/pixel_partition.hpp"

#include <cmath>
#include <stdexcept>

namespace spopo {

int PixelPartition::pixel_of(int tooth) const {
  for (int i = 0; i < size(); ++i) {
    if (pixels[static_cast<std::size_t>(i)].contains(tooth)) return i;
  }
  return -1;
}

Eigen::VectorXd smooth_profile(const FrequencyGrid& grid, const Eigen::VectorXd& values, double resolution_m) {
  if (!(resolution_m >= 0.0)) throw std::invalid_argument("filter resolution must be non-negative");
  if (values.size() != grid.tooth_count) throw std::invalid_argument("profile length does not match the grid");
  const double lambda0 = kTwoPi * kSpeedOfLight / grid.center;
  const double fwhm_hz = kSpeedOfLight * resolution_m / (lambda0 * lambda0);
  const double sigma_teeth = fwhm_hz / (2.0 * std::sqrt(2.0 * std::log(2.0))) / grid.spacing_hz();
  if (sigma_teeth < 0.05) return values;

  const Eigen::Index n = values.size();
  const auto reach = static_cast<Eigen::Index>(std::ceil(6.0 * sigma_teeth));
  Eigen::VectorXd kernel(2 * reach + 1);
  for (Eigen::Index k = -reach; k <= reach; ++k) {
    const double x = static_cast<double>(k) / sigma_teeth;
    kernel(k + reach) = std::exp(-0.5 * x * x);
  }
  kernel /= kernel.sum();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = -reach; k <= reach; ++k) {
      const Eigen::Index j = i + k;
      if (j >= 0 && j < n) out(i) += kernel(k + reach) * values(j);
    }
  }
  return out;
}

Eigen::VectorXd smoothed_intensity(const SpectralAmplitude& spectrum, double resolution_m) {
  if (spectrum.axis != SpectrumAxis::signal) throw std::invalid_argument("partition needs a signal-comb spectrum");
  return smooth_profile(spectrum.grid, spectrum.intensity(), resolution_m);
}

PixelPartition partition_equal_power(const SpectralAmplitude& spectrum, int pixels, double resolution_m) {
  if (pixels < 1) throw std::invalid_argument("pixel count must be at least 1");
  const FrequencyGrid& grid = spectrum.grid;
  if (pixels > grid.tooth_count) {
    throw std::invalid_argument("pixel count " + std::to_string(pixels) + " exceeds tooth count " +
                                std::to_string(grid.tooth_count));
  }
  const Eigen::VectorXd power = smoothed_intensity(spectrum, resolution_m);
  const Eigen::Index n = power.size();
  // cumulative(t) is the power strictly left of storage position t.
  Eigen::VectorXd cumulative(n + 1);
  cumulative(0) = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) cumulative(t + 1) = cumulative(t) + power(t);
  const double total = cumulative(n);
  if (!(total > 0.0)) throw std::invalid_argument("spectrum has no power to partition");

  std::vector<Eigen::Index> cuts{0};
  for (int k = 1; k < pixels; ++k) {
    const double target = total * k / pixels;
    // Leave room for the remaining pixels to be non-empty.
    const Eigen::Index lo = cuts.back() + 1;
    const Eigen::Index hi = n - (pixels - k);
    Eigen::Index best = lo;
    double best_err = std::abs(cumulative(lo) - target);
    for (Eigen::Index t = lo + 1; t <= hi; ++t) {
      const double err = std::abs(cumulative(t) - target);
      if (err < best_err) {
        best = t;
        best_err = err;
      }
    }
    cuts.push_back(best);
  }
  cuts.push_back(n);

  PixelPartition out;
  out.grid = grid;
  out.resolution_m = resolution_m;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    out.pixels.push_back({grid.index_at(cuts[i]), grid.index_at(cuts[i + 1])});
  }
  return out;
}

Eigen::VectorXd pixel_power_fractions(const PixelPartition& partition, const SpectralAmplitude& spectrum) {
  const Eigen::VectorXd power = smoothed_intensity(spectrum, partition.resolution_m);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(partition.size());
  for (int i = 0; i < partition.size(); ++i) {
    const ToothRange& r = partition.pixels[static_cast<std::size_t>(i)];
    for (int t = r.first; t < r.last; ++t) out(i) += power(partition.grid.position(t));
  }
  return out / power.sum();
}

}  // namespace spopo
