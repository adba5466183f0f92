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

#include "spopo/config.hpp"
#include "spopo/io.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace spopo {

enum class Stage { design, simulate, reconstruct, bootstrap };

std::set<Stage> parse_stages(const std::string& list);
std::string to_string(Stage stage);

// Everything the design stage derives from a config.
struct DesignResult {
  FrequencyGrid grid;
  SupermodeSet supermodes;
  SpectralAmplitude mean_spectrum;
  MeanField tooth_mean;
  PixelPartition partition;
  PixelState pixel_state;
  double supermode0_fwhm_hz = 0.0;
  double mean_field_fwhm_hz = 0.0;
};

SpectralAmplitude seed_spectrum(const FrequencyGrid& grid, const MeanFieldConfig& config);
DesignResult design(const ScenarioConfig& config);

std::vector<MeasurementRecord> simulate(const ScenarioConfig& config, const PixelState& pixel_state);

Reconstruction analyze(const ScenarioConfig& config, std::span<const MeasurementRecord> records, int pixels,
                       bool with_bootstrap);

struct PipelineResult {
  std::vector<std::string> artifacts;  // relative to the output directory
};

/// Runs `stages` in order, reading each stage's inputs from `out_dir` and
/// writing its outputs there, then refreshes manifest.json.
PipelineResult run_pipeline(const ScenarioConfig& config, const std::set<Stage>& stages,
                            const std::filesystem::path& out_dir);

}  // namespace spopo
