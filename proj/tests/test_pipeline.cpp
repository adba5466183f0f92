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
#include "spopo/errors.hpp"
#include "spopo/pipeline.hpp"
#include "temp_dir.hpp"

#include "json.hpp"

#include <fstream>
#include <limits>
#include <sstream>

using namespace spopo;
using testing_support::TempDir;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.grid.tooth_count = 201;
  c.grid.teeth_per_bin = 5000;
  c.mean_field.profile = MeanFieldProfile::gaussian;
  c.mean_field.width_ratio = 1.0;
  c.sampling.points = 60;
  c.bootstrap.resamples = 200;
  c.bootstrap.threads = 2;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("stage lists") {
  CHECK(parse_stages("all").size() == 4);
  CHECK(parse_stages("design,simulate") == std::set<Stage>{Stage::design, Stage::simulate});
  CHECK(parse_stages("reconstruct") == std::set<Stage>{Stage::reconstruct});
  CHECK_THROWS_AS(parse_stages("design,fly"), ConfigError);
  CHECK_THROWS_AS(parse_stages(""), ConfigError);
  CHECK(to_string(Stage::bootstrap) == "bootstrap");
}

TEST_CASE("design stage") {
  const auto d = design(small_config());
  CHECK(d.supermodes.size() == 3);
  CHECK(d.partition.size() == 4);
  CHECK(d.pixel_state.covariance.dimension() == 4);
  CHECK(d.mean_field_fwhm_hz == doctest::Approx(d.supermode0_fwhm_hz).epsilon(0.02));
  CHECK(d.supermodes.amplitude_variance(0) < 1.0);
  CHECK(d.supermodes.amplitude_variance(1) > 1.0);
  CHECK_NOTHROW(validate_covariance(d.pixel_state.covariance));

  auto with_override = small_config();
  with_override.pump.variance_override = {0.5, 1.0, 1.0};
  CHECK(design(with_override).supermodes.amplitude_variance(0) == 0.5);
}

TEST_CASE("full pipeline writes every artifact") {
  TempDir dir("pipeline");
  const auto result = run_pipeline(small_config(), parse_stages("all"), dir.path());
  const std::vector<std::string> expected{"supermodes.csv", "covariance.csv", "partition.json",
                                          "records.csv",    "report.json",    "profiles.csv"};
  CHECK(result.artifacts == expected);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  REQUIRE(manifest.at("artifacts").size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(manifest.at("artifacts")[i].at("sha256") == io::sha256_hex(dir / expected[i]));
  }
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  REQUIRE(report.contains("bootstrap"));
  CHECK(report.at("bootstrap").at("resamples") == 200);
  CHECK(report.at("modes").size() == 4);
  CHECK(report.at("modes")[0].contains("verdict"));
}

TEST_CASE("pipeline output is reproducible") {
  TempDir a("repro_a");
  TempDir b("repro_b");
  auto c = small_config();
  c.bootstrap.threads = 1;
  run_pipeline(c, parse_stages("all"), a.path());
  c.bootstrap.threads = 3;
  run_pipeline(c, parse_stages("all"), b.path());
  for (const char* name : {"supermodes.csv", "covariance.csv", "partition.json", "records.csv", "report.json",
                           "profiles.csv"}) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
}

TEST_CASE("stages run separately match a single run") {
  TempDir joint("joint");
  TempDir split("split");
  const auto c = small_config();
  run_pipeline(c, parse_stages("all"), joint.path());
  run_pipeline(c, parse_stages("design"), split.path());
  run_pipeline(c, parse_stages("simulate"), split.path());
  run_pipeline(c, parse_stages("reconstruct,bootstrap"), split.path());
  CHECK(slurp(joint / "records.csv") == slurp(split / "records.csv"));
  CHECK(slurp(joint / "report.json") == slurp(split / "report.json"));
}

TEST_CASE("missing inputs") {
  TempDir dir("missing");
  CHECK_THROWS_AS(run_pipeline(small_config(), parse_stages("simulate"), dir.path()), MissingInputError);
  CHECK_THROWS_AS(run_pipeline(small_config(), parse_stages("reconstruct"), dir.path()), MissingInputError);
}

TEST_CASE("reconstruction of externally supplied records") {
  TempDir dir("external");
  // Two pixels, 3 points each: S(1) = 5, S(2) = 7, S(1-2) = 14 -> cov(1,2) = 1.
  std::ofstream out(dir / "records.csv", std::ios::binary);
  out << R"({"schema":"spopo.records","version":1,"pixels":2})" "\n"
      << "interval_id,point_index,noise_sample,shot_sample\n";
  for (int i = 0; i < 3; ++i) out << "1," << i << ",5,4\n";
  for (int i = 0; i < 3; ++i) out << "2," << i << ",7,6\n";
  for (int i = 0; i < 3; ++i) out << "1-2," << i << ",14,10\n";
  out.close();

  const auto result = run_pipeline(small_config(), parse_stages("reconstruct"), dir.path());
  CHECK(result.artifacts == std::vector<std::string>{"records.csv", "report.json"});
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.at("photon_covariance")[0][1].get<double>() == 1.0);
  CHECK(report.at("quadrature_covariance")[0][1].get<double>() == doctest::Approx(1.0 / std::sqrt(24.0)));
  CHECK(report.at("full_beam_nin").get<double>() == doctest::Approx(1.4));
  CHECK_FALSE(report.contains("bootstrap"));
}
