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
#include "spopo/measurement_sim.hpp"
#include "spopo/pixel_partition.hpp"
#include "spopo/reconstruction.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spopo::io {

// Interchange files open with a one-line JSON stamp naming schema and
// version; readers reject a mismatched stamp instead of guessing.
inline constexpr int kSchemaVersion = 1;

// Shortest text that parses back to the same double.
std::string format_number(double value);

void write_supermodes_csv(const std::filesystem::path& path, const SupermodeSet& modes);
SupermodeSet read_supermodes_csv(const std::filesystem::path& path, const FrequencyGrid& grid);

// Pixel- or tooth-basis covariance with the mean field: row i holds
// mean_x_i followed by V(i, 0..M-1).
void write_covariance_csv(const std::filesystem::path& path, const QuadratureCovariance& v, const MeanField& mean);
PixelState read_covariance_csv(const std::filesystem::path& path);

// Columns interval_id, point_index, noise_sample, shot_sample.
void write_records_csv(const std::filesystem::path& path, std::span<const MeasurementRecord> records, int pixels);

struct RecordSet {
  int pixels = 0;
  std::vector<MeasurementRecord> records;
};
RecordSet read_records_csv(const std::filesystem::path& path);

// Partition plus the tooth-basis mean field it was cut from.
struct PartitionFile {
  PixelPartition partition;
  MeanField mean;
  PixelWeighting weighting = PixelWeighting::mean_field;
};
void write_partition_json(const std::filesystem::path& path, const PartitionFile& file);
PartitionFile read_partition_json(const std::filesystem::path& path);

std::string report_json(const Reconstruction& reconstruction);
void write_report_json(const std::filesystem::path& path, const Reconstruction& reconstruction);

void write_profiles_csv(const std::filesystem::path& path, const ModeProfiles& profiles);

std::string sha256_hex(const std::filesystem::path& path);

// Lists `artifacts` (relative to `dir`) with SHA-256 hashes; the timestamp
// lives only here.
void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& artifacts);

}  // namespace spopo::io
