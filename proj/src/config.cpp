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

#include "spopo/config.hpp"

#include "spopo/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace spopo {

using nlohmann::json;

namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<PhaseMatchingSpec::Shape> kShapes[] = {{PhaseMatchingSpec::Shape::flat, "flat"},
                                                          {PhaseMatchingSpec::Shape::gaussian, "gaussian"},
                                                          {PhaseMatchingSpec::Shape::sinc, "sinc"}};
constexpr EnumName<PixelWeighting> kWeightings[] = {{PixelWeighting::mean_field, "mean_field"},
                                                    {PixelWeighting::uniform, "uniform"}};
constexpr EnumName<MeanFieldProfile> kProfiles[] = {{MeanFieldProfile::seed, "seed"},
                                                    {MeanFieldProfile::gaussian, "gaussian"},
                                                    {MeanFieldProfile::supermode0, "supermode0"}};
constexpr EnumName<ResampleMode> kModes[] = {{ResampleMode::per_point, "per_point"},
                                             {ResampleMode::element, "element"}};
constexpr EnumName<ModeOrdering> kOrderings[] = {{ModeOrdering::power, "power"},
                                                 {ModeOrdering::eigenvalue, "eigenvalue"}};

template <typename Enum, std::size_t N>
const char* name_of(const EnumName<Enum> (&table)[N], Enum value) {
  for (const auto& e : table) {
    if (e.value == value) return e.name;
  }
  return "?";
}

// Walks one JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const json& node, std::string path, std::vector<std::string>& unknown)
      : node_(node), path_(std::move(path)), unknown_(unknown) {
    if (!node_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  ~Reader() {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) unknown_.push_back(where(key));
    }
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(node_.contains(key) ? node_.at(key) : empty, where(key), unknown_);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  // Numbers, or the string "inf".
  void read_unbounded(const std::string& key, double& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    if (v.is_string() && v.get<std::string>() == "inf") {
      out = std::numeric_limits<double>::infinity();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(where(key) + " must be a number or \"inf\"");
    }
  }

  template <typename Enum, std::size_t N>
  void read_enum(const std::string& key, const EnumName<Enum> (&table)[N], Enum& out) {
    std::string text;
    read(key, text);
    if (text.empty()) return;
    for (const auto& e : table) {
      if (text == e.name) {
        out = e.value;
        return;
      }
    }
    throw ConfigError(where(key) + " has unknown value '" + text + "'");
  }

 private:
  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& node_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

json unbounded(double v) { return std::isinf(v) ? json("inf") : json(v); }

json to_json(const ScenarioConfig& c) {
  json j;
  j["grid"] = {{"center_wavelength_nm", c.grid.center_wavelength_nm},
               {"repetition_rate_hz", c.grid.repetition_rate_hz},
               {"tooth_count", c.grid.tooth_count},
               {"teeth_per_bin", c.grid.teeth_per_bin}};
  j["pump"] = {{"pulse_fwhm_fs", unbounded(c.pump.pulse_fwhm_fs)},
               {"center_offset_hz", c.pump.center_offset_hz},
               {"pump_ratio", c.pump.pump_ratio},
               {"escape_efficiency", c.pump.escape_efficiency},
               {"analysis_frequency_hz", c.pump.analysis_frequency_hz},
               {"cavity_bandwidth_hz", c.pump.cavity_bandwidth_hz},
               {"supermodes", c.pump.supermodes},
               {"excess_noise", c.pump.excess_noise},
               {"variance_override", c.pump.variance_override}};
  j["phase_matching"] = {{"shape", name_of(kShapes, c.phase_matching.shape)},
                         {"width_thz", c.phase_matching.width_thz}};
  j["detection"] = {{"efficiency", c.detection.efficiency},
                    {"weighting", name_of(kWeightings, c.detection.weighting)}};
  j["mean_field"] = {{"profile", name_of(kProfiles, c.mean_field.profile)},
                     {"seed_pulse_fwhm_fs", c.mean_field.seed_pulse_fwhm_fs},
                     {"width_ratio", c.mean_field.width_ratio},
                     {"total_flux", c.mean_field.total_flux}};
  j["partition"] = {{"pixels", c.partition.pixels}, {"resolution_nm", c.partition.resolution_nm}};
  j["sampling"] = {{"points", c.sampling.points},
                   {"effective_averages", unbounded(c.sampling.effective_averages)},
                   {"dark_offset", c.sampling.dark_offset},
                   {"seed", c.sampling.seed}};
  j["bootstrap"] = {{"resamples", c.bootstrap.resamples},
                    {"seed", c.bootstrap.seed},
                    {"mode", name_of(kModes, c.bootstrap.mode)},
                    {"threads", c.bootstrap.threads}};
  j["report"] = {{"ordering", name_of(kOrderings, c.report.ordering)}};
  j["output_dir"] = c.output_dir;
  return j;
}

ScenarioConfig from_json(const json& root, std::vector<std::string>& unknown) {
  ScenarioConfig c;
  Reader top(root, "", unknown);
  {
    Reader r = top.child("grid");
    r.read("center_wavelength_nm", c.grid.center_wavelength_nm);
    r.read("repetition_rate_hz", c.grid.repetition_rate_hz);
    r.read("tooth_count", c.grid.tooth_count);
    r.read("teeth_per_bin", c.grid.teeth_per_bin);
  }
  {
    Reader r = top.child("pump");
    r.read_unbounded("pulse_fwhm_fs", c.pump.pulse_fwhm_fs);
    r.read("center_offset_hz", c.pump.center_offset_hz);
    r.read("pump_ratio", c.pump.pump_ratio);
    r.read("escape_efficiency", c.pump.escape_efficiency);
    r.read("analysis_frequency_hz", c.pump.analysis_frequency_hz);
    r.read("cavity_bandwidth_hz", c.pump.cavity_bandwidth_hz);
    r.read("supermodes", c.pump.supermodes);
    r.read("excess_noise", c.pump.excess_noise);
    r.read("variance_override", c.pump.variance_override);
  }
  {
    Reader r = top.child("phase_matching");
    r.read_enum("shape", kShapes, c.phase_matching.shape);
    r.read("width_thz", c.phase_matching.width_thz);
  }
  {
    Reader r = top.child("detection");
    r.read("efficiency", c.detection.efficiency);
    r.read_enum("weighting", kWeightings, c.detection.weighting);
  }
  {
    Reader r = top.child("mean_field");
    r.read_enum("profile", kProfiles, c.mean_field.profile);
    r.read("seed_pulse_fwhm_fs", c.mean_field.seed_pulse_fwhm_fs);
    r.read("width_ratio", c.mean_field.width_ratio);
    r.read("total_flux", c.mean_field.total_flux);
  }
  {
    Reader r = top.child("partition");
    r.read("pixels", c.partition.pixels);
    r.read("resolution_nm", c.partition.resolution_nm);
  }
  {
    Reader r = top.child("sampling");
    r.read("points", c.sampling.points);
    r.read_unbounded("effective_averages", c.sampling.effective_averages);
    r.read("dark_offset", c.sampling.dark_offset);
    r.read("seed", c.sampling.seed);
  }
  {
    Reader r = top.child("bootstrap");
    r.read("resamples", c.bootstrap.resamples);
    r.read("seed", c.bootstrap.seed);
    r.read_enum("mode", kModes, c.bootstrap.mode);
    r.read("threads", c.bootstrap.threads);
  }
  {
    Reader r = top.child("report");
    r.read_enum("ordering", kOrderings, c.report.ordering);
  }
  top.read("output_dir", c.output_dir);
  return c;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + " " + what);
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.grid.center_wavelength_nm > 0.0, "grid.center_wavelength_nm", "must be positive");
  require(c.grid.repetition_rate_hz > 0.0, "grid.repetition_rate_hz", "must be positive");
  require(c.grid.tooth_count >= 3 && c.grid.tooth_count % 2 == 1, "grid.tooth_count", "must be odd and >= 3");
  require(c.grid.teeth_per_bin >= 1, "grid.teeth_per_bin", "must be >= 1");
  const double span = c.grid.repetition_rate_hz * c.grid.teeth_per_bin * ((c.grid.tooth_count - 1) / 2);
  require(span < kSpeedOfLight / (c.grid.center_wavelength_nm * 1e-9), "grid.tooth_count",
          "makes the grid reach non-positive frequencies");

  require(c.pump.pulse_fwhm_fs > 0.0, "pump.pulse_fwhm_fs", "must be positive");
  require(std::isfinite(c.pump.center_offset_hz), "pump.center_offset_hz", "must be finite");
  require(c.pump.pump_ratio >= 0.0 && c.pump.pump_ratio < 1.0, "pump.pump_ratio",
          "must be in [0, 1), got " + json(c.pump.pump_ratio).dump());
  require(c.pump.escape_efficiency > 0.0 && c.pump.escape_efficiency <= 1.0, "pump.escape_efficiency",
          "must be in (0, 1]");
  require(c.pump.analysis_frequency_hz >= 0.0, "pump.analysis_frequency_hz", "must be non-negative");
  require(c.pump.cavity_bandwidth_hz > 0.0, "pump.cavity_bandwidth_hz", "must be positive");
  require(c.pump.supermodes >= 1 && c.pump.supermodes <= c.grid.tooth_count, "pump.supermodes",
          "must be in [1, tooth_count]");
  require(c.pump.excess_noise >= 0.0, "pump.excess_noise", "must be non-negative");
  require(c.pump.variance_override.empty() ||
              c.pump.variance_override.size() == static_cast<std::size_t>(c.pump.supermodes),
          "pump.variance_override", "must list one variance per supermode");
  for (double v : c.pump.variance_override) require(v > 0.0, "pump.variance_override", "entries must be positive");

  require(c.phase_matching.shape == PhaseMatchingSpec::Shape::flat || c.phase_matching.width_thz > 0.0,
          "phase_matching.width_thz", "must be positive");
  require(c.detection.efficiency >= 0.0 && c.detection.efficiency <= 1.0, "detection.efficiency",
          "must be in [0, 1]");
  require(c.mean_field.seed_pulse_fwhm_fs > 0.0, "mean_field.seed_pulse_fwhm_fs", "must be positive");
  require(c.mean_field.width_ratio > 0.0, "mean_field.width_ratio", "must be positive");
  require(c.mean_field.total_flux > 0.0, "mean_field.total_flux", "must be positive");
  require(c.partition.pixels >= 1 && c.partition.pixels <= c.grid.tooth_count, "partition.pixels",
          "must be in [1, tooth_count]");
  require(c.partition.resolution_nm >= 0.0, "partition.resolution_nm", "must be non-negative");
  require(c.sampling.points >= 2, "sampling.points", "must be >= 2");
  require(c.sampling.effective_averages > 0.0, "sampling.effective_averages", "must be positive");
  require(c.sampling.dark_offset >= 0.0, "sampling.dark_offset", "must be non-negative");
  require(c.bootstrap.resamples >= 100, "bootstrap.resamples", "must be >= 100");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
}

ConfigLoadResult parse_config(const std::string& text, bool strict) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line number.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  ConfigLoadResult out;
  std::vector<std::string> unknown;
  out.config = from_json(root, unknown);
  if (!unknown.empty()) {
    if (strict) throw ConfigError("unknown config key " + unknown.front());
    for (const auto& u : unknown) out.warnings.push_back("ignoring unknown config key " + u);
  }
  validate(out.config);
  return out;
}

ConfigLoadResult load_config(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), strict);
}

std::string dump_config(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

void save_config(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_config(config);
}

}  // namespace spopo
