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

#include "spopo/io.hpp"

#include "spopo/errors.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace spopo::io {

using nlohmann::json;

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

double parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": not a number '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("missing input file " + path.string());
  return in;
}

json read_stamp(std::istream& in, const std::filesystem::path& path, const std::string& schema) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  json stamp;
  try {
    stamp = json::parse(line);
  } catch (const json::exception&) {
    throw FormatError(path.string() + ": first line is not a JSON schema stamp");
  }
  if (!stamp.is_object() || stamp.value("schema", "") != schema) {
    throw FormatError(path.string() + ": expected schema '" + schema + "'");
  }
  if (stamp.value("version", -1) != kSchemaVersion) {
    throw FormatError(path.string() + ": unsupported " + schema + " version " + stamp.value("version", json()).dump());
  }
  return stamp;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

void write_supermodes_csv(const std::filesystem::path& path, const SupermodeSet& modes) {
  auto out = open_out(path);
  const auto k = modes.size();
  out << json{{"schema", "spopo.supermodes"}, {"version", kSchemaVersion}, {"teeth", modes.modes.rows()}, {"modes", k}}
             .dump()
      << "\n";
  out << "tooth,wavelength_nm";
  for (Eigen::Index c = 0; c < k; ++c) out << ",mode_" << c;
  out << "\ncoupling,";
  for (Eigen::Index c = 0; c < k; ++c) out << "," << format_number(modes.coupling(c));
  out << "\nvariance,";
  for (Eigen::Index c = 0; c < k; ++c) out << "," << format_number(modes.amplitude_variance(c));
  out << "\n";
  for (Eigen::Index p = 0; p < modes.modes.rows(); ++p) {
    const int tooth = modes.grid.index_at(p);
    out << tooth << "," << format_number(modes.grid.tooth_wavelength(tooth) * 1e9);
    for (Eigen::Index c = 0; c < k; ++c) out << "," << format_number(modes.modes(p, c));
    out << "\n";
  }
}

SupermodeSet read_supermodes_csv(const std::filesystem::path& path, const FrequencyGrid& grid) {
  auto in = open_in(path);
  const json stamp = read_stamp(in, path, "spopo.supermodes");
  const auto teeth = stamp.value("teeth", 0);
  const auto k = stamp.value("modes", 0);
  if (teeth != grid.tooth_count || k < 1) throw FormatError(path.string() + ": supermode header does not match grid");
  SupermodeSet s;
  s.grid = grid;
  s.modes.resize(teeth, k);
  s.coupling.resize(k);
  s.amplitude_variance.resize(k);
  std::string line;
  std::size_t lineno = 1;
  std::getline(in, line);  // column names
  ++lineno;
  for (const char* label : {"coupling", "variance"}) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated header");
    ++lineno;
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(k + 2) || cells[0] != label) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " + label + " row");
    }
    Eigen::VectorXd& dst = std::string(label) == "coupling" ? s.coupling : s.amplitude_variance;
    for (int c = 0; c < k; ++c) dst(c) = parse_number(cells[static_cast<std::size_t>(c + 2)], path, lineno);
  }
  for (int p = 0; p < teeth; ++p) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated mode table");
    ++lineno;
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(k + 2)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    for (int c = 0; c < k; ++c) s.modes(p, c) = parse_number(cells[static_cast<std::size_t>(c + 2)], path, lineno);
  }
  return s;
}

void write_covariance_csv(const std::filesystem::path& path, const QuadratureCovariance& v, const MeanField& mean) {
  if (v.dimension() != mean.amplitude.size()) throw std::invalid_argument("covariance and mean field sizes differ");
  auto out = open_out(path);
  out << json{{"schema", "spopo.covariance"},
              {"version", kSchemaVersion},
              {"basis", v.basis == Basis::pixel ? "pixel" : "tooth"},
              {"dimension", v.dimension()},
              {"total_flux", mean.total_flux}}
             .dump()
      << "\n";
  out << "mean_x";
  for (Eigen::Index j = 0; j < v.dimension(); ++j) out << ",v" << j + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < v.dimension(); ++i) {
    out << format_number(mean.amplitude(i));
    for (Eigen::Index j = 0; j < v.dimension(); ++j) out << "," << format_number(v.matrix(i, j));
    out << "\n";
  }
}

PixelState read_covariance_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  const json stamp = read_stamp(in, path, "spopo.covariance");
  const auto m = stamp.value("dimension", 0);
  if (m < 1) throw FormatError(path.string() + ": bad dimension");
  const Basis basis = stamp.value("basis", "") == "tooth" ? Basis::tooth : Basis::pixel;
  PixelState s;
  s.covariance = {basis, Eigen::MatrixXd(m, m)};
  s.mean = {basis, Eigen::VectorXd(m), stamp.value("total_flux", 1.0)};
  std::string line;
  std::getline(in, line);
  for (int i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw FormatError(path.string() + ": truncated matrix");
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(m + 1)) {
      throw FormatError(path.string() + ":" + std::to_string(i + 3) + ": wrong column count");
    }
    s.mean.amplitude(i) = parse_number(cells[0], path, static_cast<std::size_t>(i + 3));
    for (int j = 0; j < m; ++j) {
      s.covariance.matrix(i, j) = parse_number(cells[static_cast<std::size_t>(j + 1)], path, static_cast<std::size_t>(i + 3));
    }
  }
  return s;
}

void write_records_csv(const std::filesystem::path& path, std::span<const MeasurementRecord> records, int pixels) {
  auto out = open_out(path);
  out << json{{"schema", "spopo.records"}, {"version", kSchemaVersion}, {"pixels", pixels}}.dump() << "\n";
  out << "interval_id,point_index,noise_sample,shot_sample\n";
  for (const auto& r : records) {
    validate_record(r);
    const std::string id = r.interval.label();
    for (std::size_t i = 0; i < r.sample_count(); ++i) {
      out << id << "," << i << "," << format_number(r.noise[i]) << "," << format_number(r.shot[i]) << "\n";
    }
  }
}

RecordSet read_records_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  const json stamp = read_stamp(in, path, "spopo.records");
  RecordSet set;
  set.pixels = stamp.value("pixels", 0);
  if (set.pixels < 1) throw FormatError(path.string() + ": records header lacks a pixel count");
  std::string line;
  std::getline(in, line);
  if (split(line) != std::vector<std::string>{"interval_id", "point_index", "noise_sample", "shot_sample"}) {
    throw FormatError(path.string() + ":2: unexpected column names");
  }
  std::map<IntervalId, std::size_t> slot;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 4) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    const IntervalId id = IntervalId::parse(cells[0]);
    if (id.last >= set.pixels) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": interval " + id.label() +
                        " exceeds the pixel count");
    }
    auto [it, fresh] = slot.try_emplace(id, set.records.size());
    if (fresh) set.records.push_back({id, {}, {}});
    MeasurementRecord& r = set.records[it->second];
    const double index = parse_number(cells[1], path, lineno);
    if (index != static_cast<double>(r.noise.size())) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": point_index out of sequence");
    }
    r.noise.push_back(parse_number(cells[2], path, lineno));
    r.shot.push_back(parse_number(cells[3], path, lineno));
  }
  for (const auto& r : set.records) validate_record(r);
  return set;
}

void write_partition_json(const std::filesystem::path& path, const PartitionFile& file) {
  const FrequencyGrid& g = file.partition.grid;
  json pixels = json::array();
  for (const auto& r : file.partition.pixels) pixels.push_back({r.first, r.last});
  const json j = {{"schema", "spopo.partition"},
                  {"version", kSchemaVersion},
                  {"grid",
                   {{"center_rad_s", g.center},
                    {"repetition_rate_rad_s", g.repetition_rate},
                    {"tooth_count", g.tooth_count},
                    {"teeth_per_bin", g.teeth_per_bin}}},
                  {"resolution_m", file.partition.resolution_m},
                  {"pixels", pixels},
                  {"weighting", file.weighting == PixelWeighting::mean_field ? "mean_field" : "uniform"},
                  {"total_flux", file.mean.total_flux},
                  {"mean_field", vector_json(file.mean.amplitude)}};
  auto out = open_out(path);
  out << j.dump(1) << "\n";
}

PartitionFile read_partition_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
    if (j.value("schema", "") != "spopo.partition" || j.value("version", -1) != kSchemaVersion) {
      throw FormatError(path.string() + ": expected schema 'spopo.partition' version 1");
    }
    PartitionFile f;
    FrequencyGrid& g = f.partition.grid;
    g.center = j.at("grid").at("center_rad_s").get<double>();
    g.repetition_rate = j.at("grid").at("repetition_rate_rad_s").get<double>();
    g.tooth_count = j.at("grid").at("tooth_count").get<int>();
    g.teeth_per_bin = j.at("grid").at("teeth_per_bin").get<int>();
    f.partition.resolution_m = j.at("resolution_m").get<double>();
    for (const auto& p : j.at("pixels")) f.partition.pixels.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    f.weighting = j.at("weighting").get<std::string>() == "uniform" ? PixelWeighting::uniform : PixelWeighting::mean_field;
    const auto values = j.at("mean_field").get<std::vector<double>>();
    f.mean = {Basis::tooth, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
              j.at("total_flux").get<double>()};
    if (f.mean.amplitude.size() != g.tooth_count) throw FormatError(path.string() + ": mean field length mismatch");
    return f;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string report_json(const Reconstruction& rec) {
  const EigenmodeReport& report = rec.report;
  json modes = json::array();
  for (std::size_t k = 0; k < report.modes.size(); ++k) {
    const Eigenmode& m = report.modes[k];
    json entry = {{"label", "S" + std::to_string(k + 1)},
                  {"nin", m.nin},
                  {"nin_db", nin_to_db(m.nin)},
                  {"power_fraction", m.power_fraction},
                  {"vector", vector_json(m.vector)}};
    if (m.uncertainty) {
      entry["bootstrap_mean"] = m.uncertainty->mean;
      entry["bootstrap_spread"] = m.uncertainty->spread;
      entry["ci_low"] = m.uncertainty->ci_low;
      entry["ci_high"] = m.uncertainty->ci_high;
      entry["verdict"] = to_string(m.uncertainty->verdict);
    }
    modes.push_back(entry);
  }
  json j = {{"schema", "spopo.report"},
            {"version", kSchemaVersion},
            {"pixels", rec.covariance.dimension()},
            {"ordering", to_string(report.ordering)},
            {"full_beam_nin", rec.full_beam_nin},
            {"full_beam_noise_reduction_db", noise_reduction_db(rec.full_beam_nin)},
            {"mean_photons", vector_json(rec.photons.mean_photons)},
            {"photon_covariance", matrix_json(rec.photons.covariance)},
            {"correlation_matrix", matrix_json(rec.correlation)},
            {"quadrature_covariance", matrix_json(rec.covariance.matrix)},
            {"modes", modes},
            {"degenerate_groups", report.degenerate_groups}};
  if (report.bootstrap) {
    const BootstrapSummary& b = *report.bootstrap;
    j["bootstrap"] = {{"resamples", b.resamples},
                      {"seed", b.seed},
                      {"mode", to_string(b.mode)},
                      {"offdiag_mean", b.offdiag_mean},
                      {"offdiag_spread", b.offdiag_spread},
                      {"element_mean", matrix_json(b.element_mean)},
                      {"element_spread", matrix_json(b.element_spread)},
                      {"correlation_spread", matrix_json(b.correlation_spread)}};
  }
  return j.dump(2) + "\n";
}

void write_report_json(const std::filesystem::path& path, const Reconstruction& reconstruction) {
  auto out = open_out(path);
  out << report_json(reconstruction);
}

void write_profiles_csv(const std::filesystem::path& path, const ModeProfiles& profiles) {
  auto out = open_out(path);
  out << "wavelength_nm,mean_field";
  for (Eigen::Index k = 0; k < profiles.modes.cols(); ++k) out << ",S" << k + 1;
  out << "\n";
  for (std::size_t p = 0; p < profiles.wavelength_nm.size(); ++p) {
    const auto row = static_cast<Eigen::Index>(p);
    out << format_number(profiles.wavelength_nm[p]) << "," << format_number(profiles.mean_field(row));
    for (Eigen::Index k = 0; k < profiles.modes.cols(); ++k) out << "," << format_number(profiles.modes(row, k));
    out << "\n";
  }
}

std::string sha256_hex(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& artifacts) {
  json list = json::array();
  for (const auto& name : artifacts) {
    const auto path = dir / name;
    list.push_back({{"file", name}, {"sha256", sha256_hex(path)}, {"bytes", std::filesystem::file_size(path)}});
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream stamp;
  stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  const json j = {{"schema", "spopo.manifest"},
                  {"version", kSchemaVersion},
                  {"generated_at", stamp.str()},
                  {"artifacts", list}};
  auto out = open_out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

}  // namespace spopo::io
