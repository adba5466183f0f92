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
#include "spopo/bootstrap.hpp"

#include <cmath>
#include <limits>

using namespace spopo;

namespace {

PhotonCovariance squeezed_photons() {
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(4, 4);
  v.array() += (0.7 - 1.0) / 4.0;
  const Eigen::VectorXd n = Eigen::VectorXd::Constant(4, 2.5e7);
  const Eigen::VectorXd x = n.array().sqrt();
  return {x.asDiagonal() * v * x.asDiagonal(), n};
}

}  // namespace

TEST_CASE("noiseless data has zero bootstrap spread") {
  const auto records =
      simulate_records(squeezed_photons(), 50, 3, {std::numeric_limits<double>::infinity(), 0.0});
  const auto rec = reconstruct(records, 4);
  const auto out = bootstrap(records, rec.report, {200, 9, ResampleMode::per_point, 2});
  REQUIRE(out.bootstrap.has_value());
  // Pooling mixes distinct (numerically zero) elements; each element alone is constant.
  CHECK(out.bootstrap->offdiag_spread < 1e-15);
  CHECK(out.bootstrap->element_spread.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.bootstrap->correlation_spread.cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t k = 0; k < out.modes.size(); ++k) {
    REQUIRE(out.modes[k].uncertainty.has_value());
    CHECK(out.modes[k].uncertainty->spread == 0.0);
    CHECK(out.modes[k].uncertainty->mean == doctest::Approx(out.modes[k].nin).epsilon(1e-12));
  }
  CHECK(out.modes[0].uncertainty->verdict == Verdict::squeezed);
}

TEST_CASE("bootstrap is deterministic across thread counts") {
  const auto records = simulate_records(squeezed_photons(), 200, 5, {5.0, 0.0});
  const auto rec = reconstruct(records, 4);
  const auto a = bootstrap(records, rec.report, {300, 17, ResampleMode::per_point, 1});
  const auto b = bootstrap(records, rec.report, {300, 17, ResampleMode::per_point, 3});
  const auto c = bootstrap(records, rec.report, {300, 17, ResampleMode::per_point, 1});
  const auto d = bootstrap(records, rec.report, {300, 18, ResampleMode::per_point, 1});
  CHECK(a.bootstrap->element_mean == b.bootstrap->element_mean);
  CHECK(a.bootstrap->element_spread == b.bootstrap->element_spread);
  CHECK(a.bootstrap->offdiag_spread == c.bootstrap->offdiag_spread);
  CHECK(a.bootstrap->offdiag_spread != d.bootstrap->offdiag_spread);
  CHECK(a.bootstrap->resamples == 300);
  CHECK(a.bootstrap->seed == 17);
}

TEST_CASE("bootstrap spread scaling") {
  // Small per-point noise keeps the estimator linear, so spreads scale as 1/sqrt(n).
  const auto records = simulate_records(squeezed_photons(), 400, 6, {200.0, 0.0});
  const auto rec = reconstruct(records, 4);
  const auto per_point = bootstrap(records, rec.report, {400, 21, ResampleMode::per_point, 0});
  const auto element = bootstrap(records, rec.report, {400, 21, ResampleMode::element, 0});
  // Single points are sqrt(400) = 20 times noisier than 400-point means.
  const double ratio = element.bootstrap->offdiag_spread / per_point.bootstrap->offdiag_spread;
  CHECK(ratio > 10.0);
  CHECK(ratio < 40.0);
  // The pooled off-diagonal mean sits at zero within its standard error.
  const auto& s = *per_point.bootstrap;
  CHECK(std::abs(s.offdiag_mean) < 5.0 * s.offdiag_spread);
  CHECK(std::abs(s.element_mean(0, 0) - rec.report.modes[0].nin) < 3.0 * s.element_spread(0, 0));
}

TEST_CASE("bootstrap input checks") {
  const auto records = simulate_records(squeezed_photons(), 10, 3, {5.0, 0.0});
  const auto rec = reconstruct(records, 4);
  CHECK_THROWS_AS(bootstrap(records, rec.report, {99, 1, ResampleMode::per_point, 1}), std::invalid_argument);
  auto thin = records;
  thin[2].noise.resize(1);
  thin[2].shot.resize(1);
  CHECK_THROWS_AS(bootstrap(thin, rec.report, {100, 1, ResampleMode::per_point, 1}), std::invalid_argument);
  auto missing = records;
  missing.pop_back();
  CHECK_THROWS(bootstrap(missing, rec.report, {100, 1, ResampleMode::per_point, 1}));
}
