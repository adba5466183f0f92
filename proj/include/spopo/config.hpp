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
#include "spopo/gaussian_state.hpp"
#include "spopo/reconstruction.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace spopo {

struct GridConfig {
  double center_wavelength_nm = 795.0;
  double repetition_rate_hz = 76e6;
  int tooth_count = 2001;
  int teeth_per_bin = 500;
  bool operator==(const GridConfig&) const = default;
};

struct PumpConfig {
  double pulse_fwhm_fs = 120.0;
  double center_offset_hz = 0.0;
  double pump_ratio = 0.3;
  double escape_efficiency = 1.0;
  double analysis_frequency_hz = 1.5e6;
  double cavity_bandwidth_hz = 2.5e6;
  int supermodes = 3;  // modes carrying squeezing; the rest of the comb is vacuum
  double excess_noise = 0.0;
  // When non-empty, replaces the computed amplitude variances (one per supermode).
  std::vector<double> variance_override;
  bool operator==(const PumpConfig&) const = default;
};

struct PhaseMatchingConfig {
  PhaseMatchingSpec::Shape shape = PhaseMatchingSpec::Shape::gaussian;
  // Calibrated so supermode 0 is ~8.3x broader than the 120 fs seed.
  double width_thz = 330.0;
  bool operator==(const PhaseMatchingConfig&) const = default;
};

struct DetectionConfig {
  double efficiency = 0.9;
  PixelWeighting weighting = PixelWeighting::mean_field;
  bool operator==(const DetectionConfig&) const = default;
};

enum class MeanFieldProfile { seed, gaussian, supermode0 };

struct MeanFieldConfig {
  MeanFieldProfile profile = MeanFieldProfile::seed;
  double seed_pulse_fwhm_fs = 120.0;
  double width_ratio = 8.3;  // supermode-0 FWHM / mean-field FWHM, for the gaussian profile
  double total_flux = 1e8;
  bool operator==(const MeanFieldConfig&) const = default;
};

struct PartitionConfig {
  int pixels = 4;
  double resolution_nm = 1.8;
  bool operator==(const PartitionConfig&) const = default;
};

struct SamplingConfig {
  int points = 1000;
  // Chi-square degrees of freedom per data point; infinity disables estimator noise.
  double effective_averages = 5.0;
  double dark_offset = 0.0;
  std::uint64_t seed = 1;
  bool operator==(const SamplingConfig&) const = default;
};

struct BootstrapConfig {
  int resamples = 10'000;
  std::uint64_t seed = 2;
  ResampleMode mode = ResampleMode::per_point;
  unsigned threads = 0;
  bool operator==(const BootstrapConfig&) const = default;
};

struct ReportConfig {
  ModeOrdering ordering = ModeOrdering::power;
  bool operator==(const ReportConfig&) const = default;
};

struct ScenarioConfig {
  GridConfig grid;
  PumpConfig pump;
  PhaseMatchingConfig phase_matching;
  DetectionConfig detection;
  MeanFieldConfig mean_field;
  PartitionConfig partition;
  SamplingConfig sampling;
  BootstrapConfig bootstrap;
  ReportConfig report;
  std::string output_dir = "out";

  bool operator==(const ScenarioConfig&) const = default;
};

// Throws ConfigError naming the first offending field.
void validate(const ScenarioConfig& config);

struct ConfigLoadResult {
  ScenarioConfig config;
  std::vector<std::string> warnings;  // unknown keys in non-strict mode
};

/// Parses JSON text.  Empty or whitespace-only text yields the defaults.
/// Unknown keys are errors when `strict`, warnings otherwise.
ConfigLoadResult parse_config(const std::string& text, bool strict = true);
ConfigLoadResult load_config(const std::filesystem::path& path, bool strict = true);

std::string dump_config(const ScenarioConfig& config);
void save_config(const ScenarioConfig& config, const std::filesystem::path& path);

}  // namespace spopo
