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

#include "spopo/comb_model.hpp"

#include "spopo/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace spopo {

FrequencyGrid build_grid(double center_wavelength_m, double repetition_rate_hz, int tooth_count, int teeth_per_bin) {
  if (!(center_wavelength_m > 0.0) || !std::isfinite(center_wavelength_m)) {
    throw std::invalid_argument("center wavelength must be positive");
  }
  if (!(repetition_rate_hz > 0.0) || !std::isfinite(repetition_rate_hz)) {
    throw std::invalid_argument("repetition rate must be positive");
  }
  if (tooth_count < 3 || tooth_count % 2 == 0) {
    throw std::invalid_argument("tooth count must be odd and at least 3, got " + std::to_string(tooth_count));
  }
  if (teeth_per_bin < 1) {
    throw std::invalid_argument("teeth per bin must be at least 1");
  }
  FrequencyGrid grid;
  grid.center = kTwoPi * kSpeedOfLight / center_wavelength_m;
  grid.repetition_rate = kTwoPi * repetition_rate_hz;
  grid.tooth_count = tooth_count;
  grid.teeth_per_bin = teeth_per_bin;
  if (!(grid.tooth_frequency(grid.first_index()) > 0.0)) {
    throw std::invalid_argument("grid extends to non-positive frequencies");
  }
  return grid;
}

int SpectralAmplitude::first_index() const {
  return axis == SpectrumAxis::signal ? grid.first_index() : -(grid.tooth_count - 1);
}

int SpectralAmplitude::last_index() const {
  return axis == SpectrumAxis::signal ? grid.last_index() : grid.tooth_count - 1;
}

double SpectralAmplitude::at(int index) const {
  if (index < first_index() || index > last_index()) return 0.0;
  return amplitude(index - first_index());
}

namespace {

Eigen::Index axis_length(const FrequencyGrid& grid, SpectrumAxis axis) {
  return axis == SpectrumAxis::signal ? grid.tooth_count : 2 * grid.tooth_count - 1;
}

}  // namespace

SpectralAmplitude make_spectrum(const FrequencyGrid& grid, SpectrumAxis axis, Eigen::VectorXd amplitude,
                                SpectrumLabel label) {
  if (amplitude.size() != axis_length(grid, axis)) {
    throw std::invalid_argument("spectrum length " + std::to_string(amplitude.size()) + " does not match axis length " +
                                std::to_string(axis_length(grid, axis)));
  }
  if (!amplitude.allFinite() || (amplitude.array() < 0.0).any()) {
    throw std::invalid_argument("spectral amplitudes must be finite and non-negative");
  }
  SpectralAmplitude s;
  s.grid = grid;
  s.axis = axis;
  s.amplitude = std::move(amplitude);
  s.label = label;
  return s;
}

SpectralAmplitude normalized(SpectralAmplitude spectrum) {
  const double norm = spectrum.amplitude.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("cannot normalize an all-zero spectrum");
  spectrum.amplitude /= norm;
  spectrum.normalized = true;
  return spectrum;
}

double transform_limited_bandwidth(double pulse_fwhm_s) {
  if (!(pulse_fwhm_s > 0.0)) throw std::invalid_argument("pulse FWHM must be positive");
  return kGaussianTimeBandwidth / pulse_fwhm_s;
}

namespace {

// exp(-4 ln2 nu^2 / fwhm^2) in intensity, i.e. exp(-2 ln2 nu^2 / fwhm^2) in amplitude.
Eigen::VectorXd gaussian_amplitudes(int first, Eigen::Index length, double step_hz, double offset_hz,
                                    double intensity_fwhm_hz) {
  Eigen::VectorXd out(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    if (std::isinf(intensity_fwhm_hz)) {
      out(i) = 1.0;
      continue;
    }
    const double nu = (first + static_cast<int>(i)) * step_hz - offset_hz;
    out(i) = std::exp(-2.0 * std::log(2.0) * nu * nu / (intensity_fwhm_hz * intensity_fwhm_hz));
  }
  return out;
}

}  // namespace

SpectralAmplitude gaussian_pump_spectrum(const FrequencyGrid& grid, double pulse_fwhm_s, double center_offset_hz) {
  if (!(pulse_fwhm_s > 0.0)) throw std::invalid_argument("pump pulse FWHM must be positive");
  const double fwhm = std::isinf(pulse_fwhm_s) ? 0.0 : transform_limited_bandwidth(pulse_fwhm_s);
  const int first = -(grid.tooth_count - 1);
  Eigen::VectorXd amp = gaussian_amplitudes(first, axis_length(grid, SpectrumAxis::pump), grid.spacing_hz(),
                                            center_offset_hz, std::isinf(pulse_fwhm_s) ? INFINITY : fwhm);
  auto spectrum = normalized(make_spectrum(grid, SpectrumAxis::pump, std::move(amp), SpectrumLabel::pump));
  spectrum.undersampled = !std::isinf(pulse_fwhm_s) && fwhm < grid.spacing_hz();
  return spectrum;
}

SpectralAmplitude gaussian_signal_spectrum(const FrequencyGrid& grid, double intensity_fwhm_hz, SpectrumLabel label,
                                           double center_offset_hz) {
  if (!(intensity_fwhm_hz > 0.0)) throw std::invalid_argument("spectral FWHM must be positive");
  Eigen::VectorXd amp =
      gaussian_amplitudes(grid.first_index(), grid.tooth_count, grid.spacing_hz(), center_offset_hz, intensity_fwhm_hz);
  auto spectrum = normalized(make_spectrum(grid, SpectrumAxis::signal, std::move(amp), label));
  spectrum.undersampled = intensity_fwhm_hz < grid.spacing_hz();
  return spectrum;
}

double intensity_fwhm_hz(const FrequencyGrid& grid, const Eigen::VectorXd& amplitude) {
  const Eigen::VectorXd intensity = amplitude.array().square();
  Eigen::Index peak = 0;
  const double max = intensity.maxCoeff(&peak);
  if (!(max > 0.0)) throw std::invalid_argument("profile has no power");
  const double half = 0.5 * max;
  // Walk outward from the peak to the first sample below half maximum.
  Eigen::Index lo = peak;
  while (lo > 0 && intensity(lo) >= half) --lo;
  Eigen::Index hi = peak;
  while (hi < intensity.size() - 1 && intensity(hi) >= half) ++hi;
  if (intensity(lo) >= half || intensity(hi) >= half) {
    throw NumericalError("profile does not fall to half maximum inside the grid");
  }
  const double left = lo + (half - intensity(lo)) / (intensity(lo + 1) - intensity(lo));
  const double right = hi - (half - intensity(hi)) / (intensity(hi - 1) - intensity(hi));
  return (right - left) * grid.spacing_hz();
}

double PhaseMatchingSpec::envelope(double frequency_difference_hz) const {
  switch (shape) {
    case Shape::flat:
      return 1.0;
    case Shape::gaussian: {
      const double x = frequency_difference_hz / width_hz;
      return std::exp(-0.5 * x * x);
    }
    case Shape::sinc: {
      const double x = frequency_difference_hz / width_hz;
      return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    }
  }
  return 1.0;
}

CouplingMatrix coupling_matrix(const FrequencyGrid& grid, const SpectralAmplitude& pump,
                               const PhaseMatchingSpec& phase_matching) {
  if (!(pump.grid == grid)) throw std::invalid_argument("pump spectrum is defined on a different grid");
  if (pump.axis != SpectrumAxis::pump) throw std::invalid_argument("coupling requires a spectrum on the pump comb");
  if (phase_matching.shape != PhaseMatchingSpec::Shape::flat && !(phase_matching.width_hz > 0.0)) {
    throw std::invalid_argument("phase-matching width must be positive");
  }
  const Eigen::Index n = grid.tooth_count;
  CouplingMatrix out{grid, Eigen::MatrixXd(n, n)};
  // The envelope depends only on l - m; tabulate it once.
  Eigen::VectorXd envelope(n);
  for (Eigen::Index d = 0; d < n; ++d) envelope(d) = phase_matching.envelope(static_cast<double>(d) * grid.spacing_hz());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const int sum = grid.index_at(i) + grid.index_at(j);
      const double value = pump.at(sum) * envelope(i - j);
      out.entries(i, j) = value;
      out.entries(j, i) = value;
    }
  }
  if (!out.entries.allFinite()) throw NumericalError("coupling matrix has non-finite entries");
  if (out.entries.cwiseAbs().maxCoeff() == 0.0) throw NumericalError("coupling matrix is identically zero");
  return out;
}

namespace {

struct EigenPair {
  double value;
  Eigen::VectorXd vector;
};

// Eigenpairs with (1-based, ascending) indices [lo, hi] of a symmetric matrix.
std::vector<EigenPair> eigen_range(const Eigen::MatrixXd& matrix, lapack_int lo, lapack_int hi) {
  const lapack_int n = static_cast<lapack_int>(matrix.rows());
  Eigen::MatrixXd a = matrix;  // dsyevr destroys its input
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, hi - lo + 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, lo, hi, 0.0, &found, values.data(),
                     vectors.data(), n, support.data());
  if (info != 0) throw NumericalError("symmetric eigensolver failed (LAPACK info " + std::to_string(info) + ")");
  if (found != hi - lo + 1) throw NumericalError("symmetric eigensolver returned too few eigenpairs");
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(found));
  for (lapack_int k = 0; k < found; ++k) out.push_back({values(k), vectors.col(k)});
  return out;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double threshold = 1e-6 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > threshold) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

SupermodeSet decompose_supermodes(const CouplingMatrix& coupling, int k_max) {
  const Eigen::Index n = coupling.entries.rows();
  if (coupling.entries.cols() != n || n == 0) throw std::invalid_argument("coupling matrix must be square");
  if (k_max < 1 || k_max > n) {
    throw std::invalid_argument("k_max must be in [1, " + std::to_string(n) + "], got " + std::to_string(k_max));
  }
  if ((coupling.entries - coupling.entries.transpose()).cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("coupling matrix is not symmetric");
  }
  const auto nn = static_cast<lapack_int>(n);
  const auto k = static_cast<lapack_int>(k_max);
  // The k largest |eigenvalues| sit among the k lowest and k highest.
  std::vector<EigenPair> pairs;
  if (2 * k >= nn) {
    pairs = eigen_range(coupling.entries, 1, nn);
  } else {
    pairs = eigen_range(coupling.entries, 1, k);
    auto top = eigen_range(coupling.entries, nn - k + 1, nn);
    pairs.insert(pairs.end(), std::make_move_iterator(top.begin()), std::make_move_iterator(top.end()));
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) > std::abs(b.value);
    return a.value > b.value;
  });
  SupermodeSet out;
  out.grid = coupling.grid;
  out.modes.resize(n, k_max);
  out.coupling.resize(k_max);
  out.amplitude_variance = Eigen::VectorXd::Ones(k_max);
  for (int c = 0; c < k_max; ++c) {
    out.modes.col(c) = pairs[static_cast<std::size_t>(c)].vector;
    fix_sign(out.modes.col(c));
    out.coupling(c) = pairs[static_cast<std::size_t>(c)].value;
  }
  if (!out.modes.allFinite()) throw NumericalError("eigensolver produced non-finite modes");
  return out;
}

QuadraturePair opo_quadrature_variances(double sigma, double escape_efficiency, double normalized_frequency) {
  const double w2 = normalized_frequency * normalized_frequency;
  QuadraturePair q;
  q.squeezed = 1.0 - escape_efficiency * 4.0 * sigma / ((1.0 + sigma) * (1.0 + sigma) + w2);
  q.anti_squeezed = 1.0 + escape_efficiency * 4.0 * sigma / ((1.0 - sigma) * (1.0 - sigma) + w2);
  return q;
}

SupermodeSet squeezing_values(SupermodeSet modes, const SqueezingParameters& params) {
  if (!(params.pump_ratio >= 0.0 && params.pump_ratio < 1.0)) {
    throw std::invalid_argument("pump ratio must be in [0, 1); above-threshold operation is not modeled");
  }
  if (!(params.escape_efficiency > 0.0 && params.escape_efficiency <= 1.0)) {
    throw std::invalid_argument("escape efficiency must be in (0, 1]");
  }
  if (!(params.cavity_bandwidth_hz > 0.0)) throw std::invalid_argument("cavity bandwidth must be positive");
  if (!(params.analysis_frequency_hz >= 0.0)) throw std::invalid_argument("analysis frequency must be non-negative");
  if (modes.size() == 0) return modes;
  const double leading = std::abs(modes.coupling(0));
  if (!(leading > 0.0)) throw NumericalError("leading coupling eigenvalue is zero");
  const double omega = params.analysis_frequency_hz / params.cavity_bandwidth_hz;
  modes.amplitude_variance.resize(modes.size());
  for (Eigen::Index k = 0; k < modes.size(); ++k) {
    const double sigma = params.pump_ratio * std::abs(modes.coupling(k)) / leading;
    const auto q = opo_quadrature_variances(sigma, params.escape_efficiency, omega);
    modes.amplitude_variance(k) = (k % 2 == 0) ? q.squeezed : q.anti_squeezed;
  }
  return modes;
}

}  // namespace spopo
