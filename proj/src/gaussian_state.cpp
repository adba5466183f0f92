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

#include "spopo/gaussian_state.hpp"

#include "spopo/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace spopo {

void validate_covariance(const QuadratureCovariance& v, double tolerance) {
  if (v.matrix.rows() != v.matrix.cols() || v.matrix.rows() == 0) {
    throw NumericalError("covariance matrix must be square and non-empty");
  }
  if (!v.matrix.allFinite()) throw NumericalError("covariance matrix has non-finite entries");
  if ((v.matrix - v.matrix.transpose()).cwiseAbs().maxCoeff() > tolerance) {
    throw NumericalError("covariance matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(v.matrix);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
}

Eigen::VectorXd MeanField::photon_numbers() const {
  const double norm2 = amplitude.squaredNorm();
  if (!(norm2 > 0.0)) throw std::invalid_argument("mean field has no power");
  return total_flux * amplitude.array().square().matrix() / norm2;
}

MeanField mean_field_from_spectrum(const SpectralAmplitude& spectrum, double total_flux) {
  if (spectrum.axis != SpectrumAxis::signal) throw std::invalid_argument("mean field must live on the signal comb");
  if (!(total_flux > 0.0)) throw std::invalid_argument("total flux must be positive");
  if (!(spectrum.amplitude.squaredNorm() > 0.0)) throw std::invalid_argument("mean field has no power");
  return {Basis::tooth, spectrum.amplitude, total_flux};
}

QuadratureCovariance assemble_x_covariance(const SupermodeSet& modes, double excess_noise) {
  const Eigen::MatrixXd& u = modes.modes;
  const Eigen::Index k = u.cols();
  const Eigen::MatrixXd gram = u.transpose() * u;
  if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("supermodes are not orthonormal");
  }
  if (!(excess_noise >= 0.0)) throw std::invalid_argument("excess noise must be non-negative");
  const Eigen::VectorXd shift = (modes.amplitude_variance.array() + excess_noise - 1.0).matrix();
  if ((modes.amplitude_variance.array() + excess_noise <= 0.0).any()) {
    throw std::invalid_argument("supermode variances must be positive");
  }
  // U diag(s) U^T + I - U U^T = I + U diag(s - 1) U^T
  QuadratureCovariance v{Basis::tooth, Eigen::MatrixXd::Identity(u.rows(), u.rows())};
  v.matrix.noalias() += u * shift.asDiagonal() * u.transpose();
  v.matrix = 0.5 * (v.matrix + v.matrix.transpose()).eval();
  return v;
}

QuadratureCovariance apply_loss(const QuadratureCovariance& v, double efficiency) {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw std::invalid_argument("efficiency must be in [0, 1]");
  QuadratureCovariance out{v.basis, efficiency * v.matrix};
  out.matrix.diagonal().array() += 1.0 - efficiency;
  return out;
}

Eigen::MatrixXd detection_modes(const MeanField& mean, const PixelPartition& partition, PixelWeighting weighting) {
  const FrequencyGrid& grid = partition.grid;
  if (mean.basis != Basis::tooth || mean.amplitude.size() != grid.tooth_count) {
    throw std::invalid_argument("mean field must be in the tooth basis of the partition grid");
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(grid.tooth_count, partition.size());
  for (int i = 0; i < partition.size(); ++i) {
    const ToothRange& r = partition.pixels[static_cast<std::size_t>(i)];
    if (r.size() <= 0) throw std::invalid_argument("pixel " + std::to_string(i + 1) + " is empty");
    for (int t = r.first; t < r.last; ++t) {
      d(grid.position(t), i) = weighting == PixelWeighting::mean_field ? mean.amplitude(grid.position(t)) : 1.0;
    }
    const double norm = d.col(i).norm();
    if (!(norm > 0.0) || mean.amplitude.segment(grid.position(r.first), r.size()).squaredNorm() == 0.0) {
      throw std::invalid_argument("pixel " + std::to_string(i + 1) + " carries no mean power");
    }
    d.col(i) /= norm;
  }
  return d;
}

PixelState pixel_reduce(const QuadratureCovariance& v, const MeanField& mean, const PixelPartition& partition,
                        PixelWeighting weighting) {
  if (v.basis != Basis::tooth) throw std::invalid_argument("pixel_reduce expects a tooth-basis covariance");
  if (v.dimension() != partition.grid.tooth_count) {
    throw std::invalid_argument("covariance dimension does not match the partition grid");
  }
  const Eigen::MatrixXd d = detection_modes(mean, partition, weighting);
  PixelState out;
  out.covariance.basis = Basis::pixel;
  // d^T V d = I + d^T (V - I) d since the detection modes are orthonormal;
  // vacuum maps to the identity exactly.
  Eigen::MatrixXd excess = v.matrix;
  excess.diagonal().array() -= 1.0;
  out.covariance.matrix = d.transpose() * excess * d;
  out.covariance.matrix = 0.5 * (out.covariance.matrix + out.covariance.matrix.transpose()).eval();
  out.covariance.matrix.diagonal().array() += 1.0;

  const FrequencyGrid& grid = partition.grid;
  out.mean.basis = Basis::pixel;
  out.mean.amplitude.resize(partition.size());
  double detected = 0.0;
  for (int i = 0; i < partition.size(); ++i) {
    const ToothRange& r = partition.pixels[static_cast<std::size_t>(i)];
    out.mean.amplitude(i) = mean.amplitude.segment(grid.position(r.first), r.size()).norm();
    detected += out.mean.amplitude(i) * out.mean.amplitude(i);
  }
  out.mean.total_flux = mean.total_flux * detected / mean.amplitude.squaredNorm();
  return out;
}

PhotonCovariance photon_covariance_forward(const QuadratureCovariance& v_pixel, const MeanField& mean_pixel) {
  if (v_pixel.basis != Basis::pixel || mean_pixel.basis != Basis::pixel) {
    throw std::invalid_argument("photon covariance is formed in the pixel basis");
  }
  if (v_pixel.dimension() != mean_pixel.amplitude.size()) {
    throw std::invalid_argument("covariance and mean field dimensions differ");
  }
  if ((mean_pixel.amplitude.array() <= 0.0).any()) throw std::invalid_argument("every pixel needs positive mean power");
  PhotonCovariance out;
  out.mean_photons = mean_pixel.photon_numbers();
  const Eigen::VectorXd x = out.mean_photons.array().sqrt();
  out.covariance = x.asDiagonal() * v_pixel.matrix * x.asDiagonal();
  return out;
}

}  // namespace spopo
