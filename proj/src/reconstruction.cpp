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

#include "spopo/reconstruction.hpp"

#include "spopo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace spopo {

std::vector<IntervalMeans> interval_means(std::span<const MeasurementRecord> records) {
  std::vector<IntervalMeans> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    validate_record(r);
    if (r.sample_count() == 0) throw MissingInputError("interval " + r.interval.label() + " has no samples");
    const double n = static_cast<double>(r.sample_count());
    out.push_back({r.interval, std::accumulate(r.noise.begin(), r.noise.end(), 0.0) / n,
                   std::accumulate(r.shot.begin(), r.shot.end(), 0.0) / n});
  }
  return out;
}

PhotonCovariance solve_photon_covariance(std::span<const IntervalMeans> means, int pixels) {
  if (pixels < 1) throw std::invalid_argument("pixel count must be at least 1");
  // noise(a, b) with a > b denotes the empty interval.
  Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(pixels, pixels, std::nan(""));
  Eigen::VectorXd shot = Eigen::VectorXd::Constant(pixels, std::nan(""));
  for (const auto& m : means) {
    const auto& id = m.interval;
    if (id.first < 0 || id.last >= pixels) {
      throw FormatError("interval " + id.label() + " exceeds " + std::to_string(pixels) + " pixels");
    }
    noise(id.first, id.last) = m.noise;
    if (id.first == id.last) shot(id.first) = m.shot;
  }
  for (const auto& id : enumerate_intervals(pixels)) {
    if (std::isnan(noise(id.first, id.last))) throw MissingInputError("missing interval {" + id.label() + "}");
  }
  auto span_noise = [&](int a, int b) { return a > b ? 0.0 : noise(a, b); };

  PhotonCovariance out;
  out.covariance.resize(pixels, pixels);
  for (int a = 0; a < pixels; ++a) {
    out.covariance(a, a) = noise(a, a);
    for (int b = a + 1; b < pixels; ++b) {
      const double c = 0.5 * (noise(a, b) - span_noise(a + 1, b) - span_noise(a, b - 1) + span_noise(a + 1, b - 1));
      out.covariance(a, b) = c;
      out.covariance(b, a) = c;
    }
  }
  out.mean_photons = shot;
  if (!out.covariance.allFinite() || !out.mean_photons.allFinite()) {
    throw NumericalError("photon covariance solve produced non-finite values");
  }
  return out;
}

PhotonCovariance solve_photon_covariance(std::span<const MeasurementRecord> records, int pixels) {
  const auto means = interval_means(records);
  return solve_photon_covariance(means, pixels);
}

Eigen::MatrixXd correlation_matrix(const PhotonCovariance& photons) {
  const Eigen::VectorXd variance = photons.covariance.diagonal();
  if ((variance.array() <= 0.0).any()) throw NumericalError("photon-number variances must be positive");
  const Eigen::VectorXd inv_sd = variance.array().rsqrt();
  Eigen::MatrixXd c = inv_sd.asDiagonal() * photons.covariance * inv_sd.asDiagonal();
  c.diagonal().array() -= (photons.shot_variance().array() / variance.array());
  return c;
}

QuadratureCovariance quadrature_covariance(const PhotonCovariance& photons) {
  const Eigen::VectorXd& shot = photons.shot_variance();
  if ((shot.array() <= 0.0).any()) throw NumericalError("shot-noise variances must be positive");
  const Eigen::VectorXd inv = shot.array().rsqrt();
  QuadratureCovariance v{Basis::pixel, inv.asDiagonal() * photons.covariance * inv.asDiagonal()};
  return v;
}

std::string to_string(ModeOrdering ordering) {
  return ordering == ModeOrdering::power ? "power" : "eigenvalue";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::squeezed:
      return "squeezed";
    case Verdict::excess_noise:
      return "excess_noise";
    case Verdict::consistent_with_vacuum:
      return "consistent_with_vacuum";
  }
  return "?";
}

std::string to_string(ResampleMode mode) { return mode == ResampleMode::per_point ? "per_point" : "element"; }

Verdict classify(double mean, double spread) {
  if (mean + 2.0 * spread < 1.0) return Verdict::squeezed;
  if (mean - 2.0 * spread > 1.0) return Verdict::excess_noise;
  return Verdict::consistent_with_vacuum;
}

Eigen::MatrixXd EigenmodeReport::basis() const {
  if (modes.empty()) return {};
  Eigen::MatrixXd b(modes.front().vector.size(), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = modes[k].vector;
  return b;
}

EigenmodeReport eigen_analysis(const QuadratureCovariance& v, const Eigen::VectorXd& mean_pixel_amplitude,
                               ModeOrdering ordering) {
  const Eigen::Index m = v.dimension();
  if (v.matrix.cols() != m || m == 0) throw std::invalid_argument("covariance must be square");
  if (mean_pixel_amplitude.size() != m) throw std::invalid_argument("mean field dimension differs from covariance");
  const double scale = std::max(1.0, v.matrix.cwiseAbs().maxCoeff());
  if ((v.matrix - v.matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("covariance matrix is not symmetric");
  }
  const double mean_norm2 = mean_pixel_amplitude.squaredNorm();
  if (!(mean_norm2 > 0.0)) throw std::invalid_argument("mean field has no power");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(v.matrix);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-decomposition of V failed");

  EigenmodeReport report;
  report.ordering = ordering;
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigenmode mode;
    mode.vector = solver.eigenvectors().col(k);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(mode.vector(i)) > 1e-12) {
        if (mode.vector(i) < 0.0) mode.vector = -mode.vector;
        break;
      }
    }
    mode.nin = solver.eigenvalues()(k);
    const double overlap = mode.vector.dot(mean_pixel_amplitude);
    mode.power_fraction = overlap * overlap / mean_norm2;
    report.modes.push_back(std::move(mode));
  }
  // Eigen returns ascending eigenvalues, which is the eigenvalue ordering.
  if (ordering == ModeOrdering::power) {
    std::stable_sort(report.modes.begin(), report.modes.end(),
                     [](const Eigenmode& a, const Eigenmode& b) { return a.power_fraction > b.power_fraction; });
  }

  std::vector<int> by_value(static_cast<std::size_t>(m));
  std::iota(by_value.begin(), by_value.end(), 0);
  std::sort(by_value.begin(), by_value.end(), [&](int a, int b) {
    return report.modes[static_cast<std::size_t>(a)].nin < report.modes[static_cast<std::size_t>(b)].nin;
  });
  std::vector<int> group{by_value.front()};
  auto flush = [&] {
    if (group.size() > 1) {
      std::sort(group.begin(), group.end());
      report.degenerate_groups.push_back(group);
    }
  };
  for (std::size_t k = 1; k < by_value.size(); ++k) {
    const double prev = report.modes[static_cast<std::size_t>(by_value[k - 1])].nin;
    const double cur = report.modes[static_cast<std::size_t>(by_value[k])].nin;
    if (cur - prev <= kDegeneracyTolerance) {
      group.push_back(by_value[k]);
    } else {
      flush();
      group = {by_value[k]};
    }
  }
  flush();
  return report;
}

Reconstruction reconstruct(std::span<const MeasurementRecord> records, int pixels, ModeOrdering ordering) {
  Reconstruction out;
  out.photons = solve_photon_covariance(records, pixels);
  out.correlation = correlation_matrix(out.photons);
  out.covariance = quadrature_covariance(out.photons);
  out.report = eigen_analysis(out.covariance, out.photons.mean_photons.array().sqrt().matrix(), ordering);
  out.full_beam_nin = out.photons.covariance.sum() / out.photons.mean_photons.sum();
  return out;
}

ModeProfiles mode_profiles(const EigenmodeReport& report, const PixelPartition& partition, const MeanField& tooth_mean,
                           PixelWeighting weighting) {
  const Eigen::MatrixXd d = detection_modes(tooth_mean, partition, weighting);
  const Eigen::MatrixXd basis = report.basis();
  if (basis.rows() != d.cols()) throw std::invalid_argument("report and partition disagree on the pixel count");
  const FrequencyGrid& grid = partition.grid;
  ModeProfiles out;
  out.wavelength_nm.resize(static_cast<std::size_t>(grid.tooth_count));
  for (int p = 0; p < grid.tooth_count; ++p) {
    out.wavelength_nm[static_cast<std::size_t>(p)] = grid.tooth_wavelength(grid.index_at(p)) * 1e9;
  }
  out.mean_field = smooth_profile(grid, tooth_mean.amplitude / tooth_mean.amplitude.norm(), partition.resolution_m);
  const Eigen::MatrixXd raw = d * basis;
  out.modes.resize(raw.rows(), raw.cols());
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    out.modes.col(k) = smooth_profile(grid, raw.col(k), partition.resolution_m);
  }
  return out;
}

double nin_to_db(double nin) {
  if (!(nin > 0.0)) throw std::invalid_argument("normalized intensity noise must be positive");
  return 10.0 * std::log10(nin);
}

double noise_reduction_db(double nin) { return -nin_to_db(nin); }

}  // namespace spopo
