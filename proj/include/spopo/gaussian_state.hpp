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
#include "spopo/pixel_partition.hpp"

namespace spopo {

enum class Basis { tooth, pixel };

/// Amplitude-quadrature covariance V(i, j) = <dx_i dx_j + dx_j dx_i> / 2 with
/// vacuum normalized to the identity.
struct QuadratureCovariance {
  Basis basis = Basis::tooth;
  Eigen::MatrixXd matrix;

  Eigen::Index dimension() const { return matrix.rows(); }
};

// Throws NumericalError unless symmetric within `tolerance` and positive definite.
void validate_covariance(const QuadratureCovariance& v, double tolerance = 1e-12);

/// Mean amplitude <x_i> per basis element plus the total photon flux.  Photon
/// numbers follow <n_i> = flux * <x_i>^2 / sum_j <x_j>^2.
struct MeanField {
  Basis basis = Basis::tooth;
  Eigen::VectorXd amplitude;
  double total_flux = 1.0;  // photons per sample window

  Eigen::VectorXd photon_numbers() const;
};

MeanField mean_field_from_spectrum(const SpectralAmplitude& spectrum, double total_flux);

/// Photon-number statistics of the pixels: covariance cov(n_i, n_j) and the
/// mean photon numbers, which double as the shot-noise variances.
struct PhotonCovariance {
  Eigen::MatrixXd covariance;
  Eigen::VectorXd mean_photons;

  Eigen::Index dimension() const { return covariance.rows(); }
  const Eigen::VectorXd& shot_variance() const { return mean_photons; }
};

/// V = U diag(s) U^T + (I - U U^T): supermodes carry their variances and the
/// orthogonal complement is vacuum.  `excess_noise` is added to every
/// supermode variance.
QuadratureCovariance assemble_x_covariance(const SupermodeSet& modes, double excess_noise = 0.0);

// V' = eta V + (1 - eta) I.
QuadratureCovariance apply_loss(const QuadratureCovariance& v, double efficiency);

enum class PixelWeighting { mean_field, uniform };

struct PixelState {
  QuadratureCovariance covariance;
  MeanField mean;
};

// Detection-mode matrix (teeth x pixels); column i is d_i.
Eigen::MatrixXd detection_modes(const MeanField& mean, const PixelPartition& partition,
                                PixelWeighting weighting = PixelWeighting::mean_field);

/// Projects a tooth-basis state onto the pixel detection modes:
/// V_pixel(i, j) = d_i^T V d_j and <x_i> = |<x>| restricted to pixel i.
PixelState pixel_reduce(const QuadratureCovariance& v, const MeanField& mean, const PixelPartition& partition,
                        PixelWeighting weighting = PixelWeighting::mean_field);

// cov(n_i, n_j) = <x_i><x_j> V(i, j) in photon units; shot variance <n_i>.
PhotonCovariance photon_covariance_forward(const QuadratureCovariance& v_pixel, const MeanField& mean_pixel);

}  // namespace spopo
