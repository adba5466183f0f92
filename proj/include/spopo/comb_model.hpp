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

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace spopo {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
// Intensity FWHM time-bandwidth product of a transform-limited Gaussian pulse.
inline constexpr double kGaussianTimeBandwidth = 0.441;

/// Discretized signal comb.  Tooth `l` sits at center + l * spacing(), with
/// `l` in [-(N-1)/2, (N-1)/2].
///
/// `teeth_per_bin` coarse-grains the physical comb: one simulated tooth stands
/// for that many physical teeth of spacing `repetition_rate`.  With the
/// default of 1 every physical tooth is simulated and the spacing is exactly
/// the repetition rate.
struct FrequencyGrid {
  double center = 0.0;           // rad/s
  double repetition_rate = 0.0;  // rad/s
  int tooth_count = 0;
  int teeth_per_bin = 1;

  double spacing() const { return repetition_rate * teeth_per_bin; }
  double spacing_hz() const { return spacing() / kTwoPi; }
  int half_width() const { return (tooth_count - 1) / 2; }
  int first_index() const { return -half_width(); }
  int last_index() const { return half_width(); }
  double tooth_frequency(int index) const { return center + index * spacing(); }
  double tooth_wavelength(int index) const { return kTwoPi * kSpeedOfLight / tooth_frequency(index); }
  // Storage position of tooth `index` in per-tooth vectors.
  Eigen::Index position(int index) const { return index + half_width(); }
  int index_at(Eigen::Index position) const { return static_cast<int>(position) - half_width(); }

  bool operator==(const FrequencyGrid&) const = default;
};

FrequencyGrid build_grid(double center_wavelength_m, double repetition_rate_hz, int tooth_count,
                         int teeth_per_bin = 1);

enum class SpectrumLabel { pump, seed, mean_field, other };

// Signal spectra live on the N signal teeth.  Pump spectra live on the pump
// comb 2*center + n*spacing, n in [-(N-1), N-1], which covers every sum l + m.
enum class SpectrumAxis { signal, pump };

/// Real, non-negative spectral amplitude sampled on a grid.
struct SpectralAmplitude {
  FrequencyGrid grid;
  SpectrumAxis axis = SpectrumAxis::signal;
  Eigen::VectorXd amplitude;
  SpectrumLabel label = SpectrumLabel::other;
  bool normalized = false;
  // Set when the spectrum is narrower than one tooth spacing.
  bool undersampled = false;

  int first_index() const;
  int last_index() const;
  // Amplitude at comb index `index`; zero outside the sampled range.
  double at(int index) const;
  Eigen::VectorXd intensity() const { return amplitude.array().square().matrix(); }
};

// Builds a spectrum from raw values, checking length against the axis.
SpectralAmplitude make_spectrum(const FrequencyGrid& grid, SpectrumAxis axis, Eigen::VectorXd amplitude,
                                SpectrumLabel label = SpectrumLabel::other);

// Scales to unit sum of squares.
SpectralAmplitude normalized(SpectralAmplitude spectrum);

double transform_limited_bandwidth(double pulse_fwhm_s);

/// Transform-limited Gaussian pump on the pump comb, normalized.  Intensity
/// FWHM is 0.441 / pulse_fwhm; `center_offset_hz` shifts the peak away from
/// twice the signal center.  An infinite pulse width gives a flat spectrum.
SpectralAmplitude gaussian_pump_spectrum(const FrequencyGrid& grid, double pulse_fwhm_s,
                                         double center_offset_hz = 0.0);

// Normalized Gaussian on the signal teeth with the given intensity FWHM.
SpectralAmplitude gaussian_signal_spectrum(const FrequencyGrid& grid, double intensity_fwhm_hz,
                                           SpectrumLabel label, double center_offset_hz = 0.0);

// Intensity FWHM of a per-tooth amplitude profile in Hz, linearly
// interpolated at half maximum.  Throws if the profile never drops below half
// its peak inside the grid.
double intensity_fwhm_hz(const FrequencyGrid& grid, const Eigen::VectorXd& amplitude);

struct PhaseMatchingSpec {
  enum class Shape { flat, gaussian, sinc };
  Shape shape = Shape::gaussian;
  // Width in signal-frequency difference, Hz.  Gaussian: standard deviation
  // of the amplitude envelope.  Sinc: sinc(delta / width).
  double width_hz = 0.0;

  double envelope(double frequency_difference_hz) const;
  bool operator==(const PhaseMatchingSpec&) const = default;
};

struct CouplingMatrix {
  FrequencyGrid grid;
  Eigen::MatrixXd entries;  // N x N, symmetric
};

/// L(l, m) = pump(l + m) * phase_matching(l - m).  Each entry is computed once
/// and mirrored, so the result is exactly symmetric.
CouplingMatrix coupling_matrix(const FrequencyGrid& grid, const SpectralAmplitude& pump,
                               const PhaseMatchingSpec& phase_matching);

struct SupermodeSet {
  FrequencyGrid grid;
  Eigen::MatrixXd modes;              // N x K, orthonormal columns
  Eigen::VectorXd coupling;           // signed eigenvalues, |.| non-increasing
  Eigen::VectorXd amplitude_variance; // s_k, vacuum = 1

  Eigen::Index size() const { return modes.cols(); }
};

/// Leading `k_max` eigenpairs of the symmetric coupling matrix, ranked by
/// absolute eigenvalue.  Each mode is sign-fixed so that its first
/// non-negligible component is positive.  Variances start at vacuum.
SupermodeSet decompose_supermodes(const CouplingMatrix& coupling, int k_max);

struct QuadraturePair {
  double squeezed = 1.0;
  double anti_squeezed = 1.0;
};

// Below-threshold OPO output variances for a mode at normalized pump
// amplitude `sigma`, escape efficiency `escape_efficiency`, and analysis
// frequency in units of the cavity half-width.
QuadraturePair opo_quadrature_variances(double sigma, double escape_efficiency, double normalized_frequency);

struct SqueezingParameters {
  double pump_ratio = 0.0;          // sigma of the leading mode, in [0, 1)
  double escape_efficiency = 1.0;   // (0, 1]
  double analysis_frequency_hz = 0.0;
  double cavity_bandwidth_hz = 1.0; // half width at half maximum
};

/// Assigns amplitude-quadrature variances: even-index modes get the squeezed
/// value, odd-index modes the anti-squeezed one.
SupermodeSet squeezing_values(SupermodeSet modes, const SqueezingParameters& params);

}  // namespace spopo
