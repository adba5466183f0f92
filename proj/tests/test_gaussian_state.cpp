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


#include "doctest.h"
#include "oracles.hpp"
#include "spopo/errors.hpp"
#include "spopo/gaussian_state.hpp"

#include <cmath>
#include <random>

using namespace spopo;

namespace {

FrequencyGrid small_grid(int teeth) { return build_grid(795e-9, 76e6, teeth, 500); }

SupermodeSet orthonormal_modes(const FrequencyGrid& grid, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd q = oracle::random_orthogonal(grid.tooth_count, rng);
  SupermodeSet set;
  set.grid = grid;
  set.modes = q.leftCols(k);
  set.coupling = Eigen::VectorXd::Ones(k);
  set.amplitude_variance = Eigen::VectorXd::Ones(k);
  return set;
}

PixelPartition even_partition(const FrequencyGrid& grid, int pixels) {
  PixelPartition p{grid, {}, 0.0};
  const int n = grid.tooth_count;
  for (int i = 0; i < pixels; ++i) {
    p.pixels.push_back({grid.first_index() + i * n / pixels, grid.first_index() + (i + 1) * n / pixels});
  }
  return p;
}

}  // namespace

TEST_CASE("vacuum supermodes give the identity") {
  const auto grid = small_grid(31);
  const auto v = assemble_x_covariance(orthonormal_modes(grid, 5, 1));
  CHECK((v.matrix - Eigen::MatrixXd::Identity(31, 31)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("single squeezed supermode") {
  const auto grid = small_grid(31);
  auto set = orthonormal_modes(grid, 3, 2);
  set.amplitude_variance << 0.5, 1.0, 1.0;
  const auto v = assemble_x_covariance(set);
  validate_covariance(v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v.matrix);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(es.eigenvectors().col(0).dot(set.modes.col(0))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("covariance trace and excess noise") {
  const auto grid = small_grid(41);
  auto set = orthonormal_modes(grid, 4, 3);
  set.amplitude_variance << 0.3, 2.5, 0.8, 1.4;
  const auto v = assemble_x_covariance(set);
  CHECK(v.matrix.trace() == doctest::Approx(41.0 + (0.3 + 2.5 + 0.8 + 1.4 - 4.0)).epsilon(1e-13));
  const auto noisy = assemble_x_covariance(set, 0.1);
  CHECK(noisy.matrix.trace() == doctest::Approx(v.matrix.trace() + 0.4).epsilon(1e-13));
  CHECK_THROWS_AS(assemble_x_covariance(set, -0.1), std::invalid_argument);

  auto skewed = set;
  skewed.modes.col(1) = skewed.modes.col(0);
  CHECK_THROWS_AS(assemble_x_covariance(skewed), std::invalid_argument);
  auto nonpositive = set;
  nonpositive.amplitude_variance(0) = 0.0;
  CHECK_THROWS_AS(assemble_x_covariance(nonpositive), std::invalid_argument);
}

TEST_CASE("covariance validation") {
  QuadratureCovariance v{Basis::pixel, Eigen::MatrixXd::Identity(3, 3)};
  CHECK_NOTHROW(validate_covariance(v));
  v.matrix(0, 1) = 1e-6;
  CHECK_THROWS_AS(validate_covariance(v), NumericalError);
  v.matrix(0, 1) = v.matrix(1, 0) = 2.0;
  CHECK_THROWS_AS(validate_covariance(v), NumericalError);
}

TEST_CASE("loss") {
  QuadratureCovariance v{Basis::pixel, Eigen::MatrixXd::Identity(2, 2)};
  v.matrix(0, 0) = 0.5;
  v.matrix(1, 1) = 2.0;
  CHECK(apply_loss(v, 0.9).matrix(0, 0) == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(apply_loss(v, 1.0).matrix == v.matrix);
  CHECK(apply_loss(v, 0.0).matrix == Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(apply_loss(v, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(apply_loss(v, -0.1), std::invalid_argument);

  // Loss pulls every eigenvalue toward vacuum.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd q = oracle::random_orthogonal(6, rng);
    std::vector<double> ev(6);
    for (auto& e : ev) e = 0.1 + 3.0 * u(rng);
    const QuadratureCovariance w{Basis::pixel, oracle::spectral_synthesis(q, ev)};
    const double eta = u(rng);
    const auto lossy = apply_loss(w, eta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a(w.matrix), b(lossy.matrix);
    for (int k = 0; k < 6; ++k) {
      CHECK(b.eigenvalues()(k) == doctest::Approx(eta * a.eigenvalues()(k) + 1.0 - eta).epsilon(1e-12));
    }
  }
}

TEST_CASE("pixel reduction of vacuum is exact") {
  const auto grid = small_grid(41);
  const auto seed = gaussian_signal_spectrum(grid, 20 * grid.spacing_hz(), SpectrumLabel::seed);
  const auto mean = mean_field_from_spectrum(seed, 1e8);
  const auto state = pixel_reduce({Basis::tooth, Eigen::MatrixXd::Identity(41, 41)}, mean, even_partition(grid, 4));
  CHECK(state.covariance.basis == Basis::pixel);
  CHECK(state.covariance.matrix == Eigen::MatrixXd::Identity(4, 4));
  CHECK(state.mean.total_flux == doctest::Approx(1e8).epsilon(1e-14));
}

TEST_CASE("rank-one projection onto pixels") {
  const auto grid = small_grid(81);
  const auto seed = gaussian_signal_spectrum(grid, 20 * grid.spacing_hz(), SpectrumLabel::seed);
  const auto mean = mean_field_from_spectrum(seed, 1e8);
  const auto partition = even_partition(grid, 4);

  // The squeezed mode is the mean field itself.
  SupermodeSet set{grid, seed.amplitude, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 0.6)};
  const auto state = pixel_reduce(assemble_x_covariance(set), mean, partition);

  // Oracle: V_ij = delta_ij + (s - 1) sqrt(p_i p_j), p_i = pixel power fraction.
  Eigen::VectorXd p(4);
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int t = partition.pixels[i].first; t < partition.pixels[i].last; ++t) {
      s += seed.amplitude(grid.position(t)) * seed.amplitude(grid.position(t));
    }
    p(i) = s;
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(state.covariance.matrix(i, j) ==
            doctest::Approx((i == j ? 1.0 : 0.0) - 0.4 * std::sqrt(p(i) * p(j))).epsilon(1e-12));

  // The full beam sees the supermode variance.
  const Eigen::VectorXd x = state.mean.amplitude / state.mean.amplitude.norm();
  CHECK(x.dot(state.covariance.matrix * x) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("equal-power rank-one projection") {
  // Flat mean field over 4 equal pixels: V = I + (s - 1)/4.
  const auto grid = small_grid(41);
  const auto flat = normalized(make_spectrum(grid, SpectrumAxis::signal, Eigen::VectorXd::Ones(41)));
  PixelPartition partition{grid, {{-20, -10}, {-10, 0}, {0, 10}, {10, 20}}, 0.0};
  Eigen::VectorXd mode = Eigen::VectorXd::Zero(41);
  mode.head(40).setOnes();
  mode.normalize();
  SupermodeSet set{grid, mode, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 0.865)};
  const auto state = pixel_reduce(assemble_x_covariance(set), mean_field_from_spectrum(flat, 4.0), partition);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(state.covariance.matrix(i, j) ==
            doctest::Approx((i == j ? 1.0 : 0.0) + (0.865 - 1.0) / 4.0).epsilon(1e-13));
  // Tooth 20 lies outside every pixel.
  CHECK(state.mean.total_flux == doctest::Approx(4.0 * 40.0 / 41.0).epsilon(1e-14));
}

TEST_CASE("uniform weighting differs from mean-field weighting") {
  const auto grid = small_grid(41);
  const auto seed = gaussian_signal_spectrum(grid, 10 * grid.spacing_hz(), SpectrumLabel::seed);
  const auto mean = mean_field_from_spectrum(seed, 1.0);
  const auto partition = even_partition(grid, 2);
  const Eigen::MatrixXd dm = detection_modes(mean, partition, PixelWeighting::mean_field);
  const Eigen::MatrixXd du = detection_modes(mean, partition, PixelWeighting::uniform);
  CHECK((dm.transpose() * dm - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((du.transpose() * du - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(du(0, 0) == doctest::Approx(1.0 / std::sqrt(20.0)));
  CHECK(dm(0, 0) < du(0, 0));
}

TEST_CASE("pixel reduction preserves positive definiteness") {
  const auto grid = small_grid(61);
  const auto seed = gaussian_signal_spectrum(grid, 15 * grid.spacing_hz(), SpectrumLabel::seed);
  const auto mean = mean_field_from_spectrum(seed, 1e6);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto set = orthonormal_modes(grid, 6, 100 + trial);
    for (auto& s : set.amplitude_variance) s = u(rng);
    const auto state = pixel_reduce(assemble_x_covariance(set), mean, even_partition(grid, 5));
    CHECK_NOTHROW(validate_covariance(state.covariance));
  }
}

TEST_CASE("pixel reduction rejects dark pixels") {
  const auto grid = small_grid(21);
  Eigen::VectorXd amp = Eigen::VectorXd::Zero(21);
  amp.tail(10).setOnes();
  const auto mean = mean_field_from_spectrum(make_spectrum(grid, SpectrumAxis::signal, amp), 1.0);
  CHECK_THROWS_AS(pixel_reduce({Basis::tooth, Eigen::MatrixXd::Identity(21, 21)}, mean, even_partition(grid, 2)),
                  std::invalid_argument);
}

TEST_CASE("photon covariance from pixel state") {
  MeanField mean{Basis::pixel, Eigen::VectorXd::Ones(4), 1e8};
  QuadratureCovariance vac{Basis::pixel, Eigen::MatrixXd::Identity(4, 4)};
  const auto shot = photon_covariance_forward(vac, mean);
  CHECK(shot.mean_photons.isApproxToConstant(2.5e7));
  CHECK(shot.covariance.isApprox(2.5e7 * Eigen::MatrixXd::Identity(4, 4)));

  QuadratureCovariance rank1{Basis::pixel, Eigen::MatrixXd::Identity(4, 4)};
  rank1.matrix.array() += (0.865 - 1.0) / 4.0;
  const auto sq = photon_covariance_forward(rank1, mean);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(sq.covariance(i, j) == sq.covariance(0, 1));

  MeanField uneven{Basis::pixel, Eigen::Vector4d(1.0, 2.0, 3.0, 4.0), 30.0};
  const auto p = photon_covariance_forward(rank1, uneven);
  CHECK(p.mean_photons(3) == doctest::Approx(16.0));
  CHECK(p.covariance(0, 3) == doctest::Approx(std::sqrt(1.0 * 16.0) * rank1.matrix(0, 3)));

  CHECK_THROWS_AS(photon_covariance_forward(vac, MeanField{Basis::pixel, Eigen::VectorXd::Ones(3), 1.0}),
                  std::invalid_argument);
}
