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

#include "spopo/bootstrap.hpp"

#include "spopo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace spopo {

namespace {

struct Moments {
  double mean = 0.0;
  double spread = 0.0;
};

// Shifted two-pass moments: identical inputs give exactly zero spread.
Moments moments(const std::vector<double>& xs) {
  const double x0 = xs.front();
  double shifted = 0.0;
  for (double x : xs) shifted += x - x0;
  const double n = static_cast<double>(xs.size());
  const double offset = shifted / n;
  double ss = 0.0;
  for (double x : xs) {
    const double d = (x - x0) - offset;
    ss += d * d;
  }
  return {x0 + offset, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

struct Sample {
  Eigen::MatrixXd rotated;      // S^T V_b S
  Eigen::MatrixXd correlation;  // C_b
};

Sample one_resample(std::span<const MeasurementRecord> records, int pixels, const Eigen::MatrixXd& basis,
                    ResampleMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<IntervalMeans> means;
  means.reserve(records.size());
  for (const auto& r : records) {
    const std::size_t n = r.sample_count();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    IntervalMeans m{r.interval, 0.0, 0.0};
    if (mode == ResampleMode::element) {
      const std::size_t i = pick(rng);
      m.noise = r.noise[i];
      m.shot = r.shot[i];
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = pick(rng);
        m.noise += r.noise[i];
        m.shot += r.shot[i];
      }
      m.noise /= static_cast<double>(n);
      m.shot /= static_cast<double>(n);
    }
    means.push_back(m);
  }
  const PhotonCovariance photons = solve_photon_covariance(means, pixels);
  const QuadratureCovariance v = quadrature_covariance(photons);
  return {basis.transpose() * v.matrix * basis, correlation_matrix(photons)};
}

}  // namespace

EigenmodeReport bootstrap(std::span<const MeasurementRecord> records, EigenmodeReport report,
                          const BootstrapOptions& options) {
  if (options.resamples < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");
  for (const auto& r : records) {
    validate_record(r);
    if (r.sample_count() < 2) {
      throw std::invalid_argument("interval " + r.interval.label() + " has fewer than 2 samples");
    }
  }
  const Eigen::MatrixXd basis = report.basis();
  const int pixels = static_cast<int>(basis.rows());
  if (pixels == 0) throw std::invalid_argument("report has no modes");

  const auto count = static_cast<std::size_t>(options.resamples);
  std::vector<Sample> samples(count);
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  {
    std::vector<std::jthread> workers;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t r = t; r < count; r += threads) {
            samples[r] = one_resample(records, pixels, basis, options.mode, derive_seed(options.seed, r));
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    workers.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BootstrapSummary summary;
  summary.resamples = options.resamples;
  summary.seed = options.seed;
  summary.mode = options.mode;
  summary.element_mean.resize(pixels, pixels);
  summary.element_spread.resize(pixels, pixels);
  summary.correlation_spread.resize(pixels, pixels);
  std::vector<double> column(count);
  std::vector<double> pooled;
  pooled.reserve(count * static_cast<std::size_t>(pixels * (pixels - 1) / 2));
  for (int i = 0; i < pixels; ++i) {
    for (int j = 0; j < pixels; ++j) {
      for (std::size_t r = 0; r < count; ++r) column[r] = samples[r].rotated(i, j);
      const Moments mo = moments(column);
      summary.element_mean(i, j) = mo.mean;
      summary.element_spread(i, j) = mo.spread;
      if (i < j) pooled.insert(pooled.end(), column.begin(), column.end());
      for (std::size_t r = 0; r < count; ++r) column[r] = samples[r].correlation(i, j);
      summary.correlation_spread(i, j) = moments(column).spread;
    }
  }
  if (!pooled.empty()) {
    const Moments mo = moments(pooled);
    summary.offdiag_mean = mo.mean;
    summary.offdiag_spread = mo.spread;
  }
  for (int k = 0; k < pixels; ++k) {
    ModeUncertainty u;
    u.mean = summary.element_mean(k, k);
    u.spread = summary.element_spread(k, k);
    u.ci_low = u.mean - 2.0 * u.spread;
    u.ci_high = u.mean + 2.0 * u.spread;
    u.verdict = classify(u.mean, u.spread);
    report.modes[static_cast<std::size_t>(k)].uncertainty = u;
  }
  report.bootstrap = std::move(summary);
  return report;
}

}  // namespace spopo
