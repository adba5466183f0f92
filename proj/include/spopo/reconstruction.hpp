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
#include "spopo/measurement_sim.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spopo {

struct IntervalMeans {
  IntervalId interval;
  double noise = 0.0;
  double shot = 0.0;
};

std::vector<IntervalMeans> interval_means(std::span<const MeasurementRecord> records);

/// Inverts the interval sums exactly.  With S(a, b) the noise of pixels a..b:
///   cov(a, a) = S(a, a)
///   2 cov(a, b) = S(a, b) - S(a+1, b) - S(a, b-1) + S(a+1, b-1)
/// and <n_i> is the singleton shot mean.
PhotonCovariance solve_photon_covariance(std::span<const IntervalMeans> means, int pixels);
PhotonCovariance solve_photon_covariance(std::span<const MeasurementRecord> records, int pixels);

// C(i, j) = cov(n_i, n_j) / sqrt(dn_i^2 dn_j^2) - delta_ij dn_i,shot^2 / dn_i^2
Eigen::MatrixXd correlation_matrix(const PhotonCovariance& photons);

// V(i, j) = cov(n_i, n_j) / sqrt(dn_i,shot^2 dn_j,shot^2)
QuadratureCovariance quadrature_covariance(const PhotonCovariance& photons);

enum class ModeOrdering { power, eigenvalue };
enum class Verdict { squeezed, excess_noise, consistent_with_vacuum };

std::string to_string(ModeOrdering ordering);
std::string to_string(Verdict verdict);

// Bootstrap interval mean +- 2 spread against the vacuum level 1.
Verdict classify(double mean, double spread);

struct ModeUncertainty {
  double mean = 0.0;
  double spread = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Verdict verdict = Verdict::consistent_with_vacuum;
};

struct Eigenmode {
  Eigen::VectorXd vector;  // over pixels, first non-negligible component positive
  double nin = 1.0;        // eigenvalue of V
  double power_fraction = 0.0;
  std::optional<ModeUncertainty> uncertainty;
};

enum class ResampleMode { per_point, element };
std::string to_string(ResampleMode mode);

struct BootstrapSummary {
  int resamples = 0;
  std::uint64_t seed = 0;
  ResampleMode mode = ResampleMode::per_point;
  // Off-diagonal elements of S^T V_b S, pooled over pairs and resamples.
  double offdiag_mean = 0.0;
  double offdiag_spread = 0.0;
  Eigen::MatrixXd element_mean;    // M x M in the report's mode order
  Eigen::MatrixXd element_spread;
  Eigen::MatrixXd correlation_spread;  // spread of C(i, j) in the pixel basis
};

struct EigenmodeReport {
  std::vector<Eigenmode> modes;
  ModeOrdering ordering = ModeOrdering::power;
  // Groups of report positions whose eigenvalues agree within 1e-8.
  std::vector<std::vector<int>> degenerate_groups;
  std::optional<BootstrapSummary> bootstrap;

  // Columns are the mode vectors in report order.
  Eigen::MatrixXd basis() const;
};

inline constexpr double kDegeneracyTolerance = 1e-8;

/// Diagonalizes the pixel covariance.  Power fraction of mode l is
/// (S_l . <x>)^2 / |<x>|^2 with <x>_i = sqrt(<n_i>).
EigenmodeReport eigen_analysis(const QuadratureCovariance& v, const Eigen::VectorXd& mean_pixel_amplitude,
                               ModeOrdering ordering = ModeOrdering::power);

struct Reconstruction {
  PhotonCovariance photons;
  Eigen::MatrixXd correlation;
  QuadratureCovariance covariance;
  EigenmodeReport report;
  double full_beam_nin = 1.0;
};

// Records -> photon covariance -> C and V -> eigenmodes.
Reconstruction reconstruct(std::span<const MeasurementRecord> records, int pixels,
                           ModeOrdering ordering = ModeOrdering::power);

struct ModeProfiles {
  std::vector<double> wavelength_nm;
  Eigen::VectorXd mean_field;  // normalized amplitude
  Eigen::MatrixXd modes;       // teeth x M, report order
};

/// Spectral shape of each pixel eigenmode, sum_i S_l(i) d_i, smoothed by the
/// filter resolution for display.
ModeProfiles mode_profiles(const EigenmodeReport& report, const PixelPartition& partition,
                           const MeanField& tooth_mean, PixelWeighting weighting = PixelWeighting::mean_field);

double nin_to_db(double nin);
// Positive when the noise is below shot noise.
double noise_reduction_db(double nin);

}  // namespace spopo
