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

// spopo: design / simulate / reconstruct / report / run.
//
// Exit codes: 0 success, 1 I/O failure, 2 config error, 3 missing input,
// 4 numerical failure.

#include "spopo/errors.hpp"
#include "spopo/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string stages = "all";
  bool strict = false;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "Scenario config (JSON); defaults when omitted");
  cmd->add_option("--out", opt.out_dir, "Output directory (overrides output_dir)");
  cmd->add_option("--seed", opt.seed, "Master seed: sampling uses N, bootstrap N + 1");
  cmd->add_flag("--strict", opt.strict, "Reject unknown config keys");
}

int run(const Options& opt, const std::set<spopo::Stage>& stages) {
  spopo::ScenarioConfig config;
  if (!opt.config_path.empty()) {
    auto loaded = spopo::load_config(opt.config_path, opt.strict);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    config = std::move(loaded.config);
  }
  if (opt.seed) {
    config.sampling.seed = *opt.seed;
    config.bootstrap.seed = *opt.seed + 1;
  }
  if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
  const auto result = spopo::run_pipeline(config, stages, config.output_dir);
  for (const auto& a : result.artifacts) std::cout << config.output_dir << "/" << a << "\n";
  std::cout << config.output_dir << "/manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronously pumped OPO twin: simulate pixelized intensity-noise data and reconstruct its eigenmodes"};
  app.require_subcommand(1);
  Options opt;

  auto* design = app.add_subcommand("design", "Build supermodes and the pixel covariance");
  auto* simulate = app.add_subcommand("simulate", "Sample interval variance records from covariance.csv");
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct V and eigenmodes from records.csv");
  auto* report = app.add_subcommand("report", "Reconstruct and bootstrap from records.csv");
  auto* all = app.add_subcommand("run", "Run the selected stages (default: all)");
  for (auto* cmd : {design, simulate, reconstruct, report, all}) add_common(cmd, opt);
  all->add_option("--stages", opt.stages, "Comma list of design,simulate,reconstruct,bootstrap or all");

  CLI11_PARSE(app, argc, argv);

  try {
    using spopo::Stage;
    if (design->parsed()) return run(opt, {Stage::design});
    if (simulate->parsed()) return run(opt, {Stage::simulate});
    if (reconstruct->parsed()) return run(opt, {Stage::reconstruct});
    if (report->parsed()) return run(opt, {Stage::reconstruct, Stage::bootstrap});
    return run(opt, spopo::parse_stages(opt.stages));
  } catch (const spopo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const spopo::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 3;
  } catch (const spopo::FormatError& e) {
    std::cerr << "bad input: " << e.what() << "\n";
    return 3;
  } catch (const spopo::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
