// SPDX-License-Identifier: Apache-2.0
//
// milac-sim: analog matrix computing and beamforming simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// milac <experiment> --config <path> [--seed S] [--out DIR] [--validate]
//
// Exit codes: 0 success, 1 runtime failure, 2 bad config or usage,
// 3 numerical trouble (more than 1% singular redraws).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "milac/experiment.hpp"

int main(int argc, char** argv) {
  using namespace milac::cli;

  CLI::App app{"Analog matrix computing and beamforming experiments"};
  app.set_version_flag("--version", std::string(kVersion));

  std::string experiment_name;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool validate_only = false;

  std::string choices;
  for (auto n : kExperimentNames) choices += (choices.empty() ? "" : ", ") + std::string(n);
  app.add_option("experiment", experiment_name, "One of: " + choices)->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Override the output directory");
  app.add_flag("--validate", validate_only, "Parse and check the config, run nothing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto experiment = parse_experiment(experiment_name);
  if (!experiment) {
    std::cerr << "error: unknown experiment '" << experiment_name << "' (expected one of "
              << choices << ")\n";
    return 2;
  }

  try {
    std::optional<std::filesystem::path> out;
    if (out_dir) out = *out_dir;
    const ExperimentConfig cfg = load_config(*experiment, config_path, seed, out);
    if (validate_only) {
      std::cout << "config ok: " << experiment_name << " hash " << config_hash(cfg) << '\n';
      return 0;
    }
    const RunResult result = run(cfg);
    write_artifacts(cfg.out_dir, result);
    for (const auto& f : result.files) std::cout << (cfg.out_dir / f.name).string() << '\n';
    if (result.redraws > 0)
      std::cerr << "note: " << result.redraws << " singular channel draws were redrawn\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalTrouble& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
