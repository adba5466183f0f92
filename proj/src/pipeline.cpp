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

#include "spopo/pipeline.hpp"

#include "spopo/bootstrap.hpp"
#include "spopo/errors.hpp"

#include <fstream>
#include <sstream>

namespace spopo {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSupermodes = "supermodes.csv";
constexpr const char* kCovariance = "covariance.csv";
constexpr const char* kPartition = "partition.json";
constexpr const char* kRecords = "records.csv";
constexpr const char* kReport = "report.json";
constexpr const char* kProfiles = "profiles.csv";

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::design:
      return "design";
    case Stage::simulate:
      return "simulate";
    case Stage::reconstruct:
      return "reconstruct";
    case Stage::bootstrap:
      return "bootstrap";
  }
  return "?";
}

std::set<Stage> parse_stages(const std::string& list) {
  std::set<Stage> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "design") {
      out.insert(Stage::design);
    } else if (item == "simulate") {
      out.insert(Stage::simulate);
    } else if (item == "reconstruct") {
      out.insert(Stage::reconstruct);
    } else if (item == "bootstrap") {
      out.insert(Stage::bootstrap);
    } else if (item == "all") {
      out = {Stage::design, Stage::simulate, Stage::reconstruct, Stage::bootstrap};
    } else if (!item.empty()) {
      throw ConfigError("unknown stage '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no stages selected");
  return out;
}

SpectralAmplitude seed_spectrum(const FrequencyGrid& grid, const MeanFieldConfig& config) {
  return gaussian_signal_spectrum(grid, transform_limited_bandwidth(config.seed_pulse_fwhm_fs * 1e-15),
                                  SpectrumLabel::seed);
}

DesignResult design(const ScenarioConfig& config) {
  validate(config);
  DesignResult d;
  d.grid = build_grid(config.grid.center_wavelength_nm * 1e-9, config.grid.repetition_rate_hz, config.grid.tooth_count,
                      config.grid.teeth_per_bin);
  const auto pump = gaussian_pump_spectrum(d.grid, config.pump.pulse_fwhm_fs * 1e-15, config.pump.center_offset_hz);
  const PhaseMatchingSpec pm{config.phase_matching.shape, config.phase_matching.width_thz * 1e12};
  d.supermodes = decompose_supermodes(coupling_matrix(d.grid, pump, pm), config.pump.supermodes);
  d.supermodes = squeezing_values(std::move(d.supermodes),
                                  {config.pump.pump_ratio, config.pump.escape_efficiency,
                                   config.pump.analysis_frequency_hz, config.pump.cavity_bandwidth_hz});
  if (!config.pump.variance_override.empty()) {
    d.supermodes.amplitude_variance = Eigen::Map<const Eigen::VectorXd>(
        config.pump.variance_override.data(), static_cast<Eigen::Index>(config.pump.variance_override.size()));
  }
  d.supermode0_fwhm_hz = intensity_fwhm_hz(d.grid, d.supermodes.modes.col(0));

  switch (config.mean_field.profile) {
    case MeanFieldProfile::seed:
      d.mean_spectrum = seed_spectrum(d.grid, config.mean_field);
      break;
    case MeanFieldProfile::gaussian:
      d.mean_spectrum = gaussian_signal_spectrum(d.grid, d.supermode0_fwhm_hz / config.mean_field.width_ratio,
                                                 SpectrumLabel::mean_field);
      break;
    case MeanFieldProfile::supermode0:
      d.mean_spectrum = normalized(make_spectrum(d.grid, SpectrumAxis::signal, d.supermodes.modes.col(0).cwiseAbs(),
                                                 SpectrumLabel::mean_field));
      break;
  }
  d.mean_field_fwhm_hz = intensity_fwhm_hz(d.grid, d.mean_spectrum.amplitude);
  d.tooth_mean = mean_field_from_spectrum(d.mean_spectrum, config.mean_field.total_flux);
  d.partition = partition_equal_power(d.mean_spectrum, config.partition.pixels, config.partition.resolution_nm * 1e-9);

  const QuadratureCovariance tooth_v =
      apply_loss(assemble_x_covariance(d.supermodes, config.pump.excess_noise), config.detection.efficiency);
  d.pixel_state = pixel_reduce(tooth_v, d.tooth_mean, d.partition, config.detection.weighting);
  return d;
}

std::vector<MeasurementRecord> simulate(const ScenarioConfig& config, const PixelState& pixel_state) {
  const PhotonCovariance photons = photon_covariance_forward(pixel_state.covariance, pixel_state.mean);
  return simulate_records(photons, config.sampling.points, config.sampling.seed,
                          {config.sampling.effective_averages, config.sampling.dark_offset});
}

Reconstruction analyze(const ScenarioConfig& config, std::span<const MeasurementRecord> records, int pixels,
                       bool with_bootstrap) {
  Reconstruction rec = reconstruct(records, pixels, config.report.ordering);
  if (with_bootstrap) {
    rec.report = bootstrap(records, std::move(rec.report),
                           {config.bootstrap.resamples, config.bootstrap.seed, config.bootstrap.mode,
                            config.bootstrap.threads});
  }
  return rec;
}

PipelineResult run_pipeline(const ScenarioConfig& config, const std::set<Stage>& stages, const fs::path& out_dir) {
  validate(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("cannot create output directory " + out_dir.string());

  if (stages.contains(Stage::design)) {
    const DesignResult d = design(config);
    io::write_supermodes_csv(out_dir / kSupermodes, d.supermodes);
    io::write_covariance_csv(out_dir / kCovariance, d.pixel_state.covariance, d.pixel_state.mean);
    io::write_partition_json(out_dir / kPartition, {d.partition, d.tooth_mean, config.detection.weighting});
  }
  if (stages.contains(Stage::simulate)) {
    if (!fs::exists(out_dir / kCovariance)) {
      throw MissingInputError("simulate needs " + (out_dir / kCovariance).string() + " (run the design stage)");
    }
    const PixelState state = io::read_covariance_csv(out_dir / kCovariance);
    if (state.covariance.basis != Basis::pixel) throw FormatError("simulate expects a pixel-basis covariance");
    validate_covariance(state.covariance, 1e-9);
    const auto records = simulate(config, state);
    io::write_records_csv(out_dir / kRecords, records, static_cast<int>(state.covariance.dimension()));
  }
  const bool want_boot = stages.contains(Stage::bootstrap);
  if (stages.contains(Stage::reconstruct) || want_boot) {
    if (!fs::exists(out_dir / kRecords)) {
      throw MissingInputError("reconstruction needs " + (out_dir / kRecords).string());
    }
    const io::RecordSet set = io::read_records_csv(out_dir / kRecords);
    const Reconstruction rec = analyze(config, set.records, set.pixels, want_boot);
    io::write_report_json(out_dir / kReport, rec);
    if (fs::exists(out_dir / kPartition)) {
      const io::PartitionFile part = io::read_partition_json(out_dir / kPartition);
      if (part.partition.size() == set.pixels) {
        io::write_profiles_csv(out_dir / kProfiles,
                               mode_profiles(rec.report, part.partition, part.mean, part.weighting));
      }
    }
  }

  PipelineResult result;
  for (const char* name : {kSupermodes, kCovariance, kPartition, kRecords, kReport, kProfiles}) {
    if (fs::exists(out_dir / name)) result.artifacts.emplace_back(name);
  }
  io::write_manifest(out_dir, result.artifacts);
  return result;
}

}  // namespace spopo
