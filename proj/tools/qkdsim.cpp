// Copyright 2026 The qkdsim Authors
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

#include "cli/commands.hpp"
#include "cli/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

using qkdsim::cli::Config;
using qkdsim::cli::ConfigError;

std::string choices_help(const qkdsim::cli::KeySpec& spec) {
  std::string out = spec.help;
  if (!spec.choices.empty()) {
    out += " {";
    for (std::size_t i = 0; i < spec.choices.size(); ++i) {
      out += (i ? "," : "") + spec.choices[i];
    }
    out += "}";
  }
  if (!spec.fallback.empty()) out += " [default: " + spec.fallback + "]";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-rate, verification and shot-sampling runs for QKD under amplitude damping."};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", overrides["output.path"], "same as --output.path");
  app.add_option("--seed", overrides["run.seed"], "same as --run.seed");
  app.add_option("--profile", overrides["profile.name"], "same as --profile.name");
  app.add_option("--points", overrides["sweep.points"], "same as --sweep.points");

  std::map<std::string, std::string> per_key;
  for (const auto& spec : qkdsim::cli::schema()) {
    app.add_option("--" + spec.key, per_key[spec.key], choices_help(spec))->group("Config keys");
  }

  const std::map<std::string, std::string> footers = {
      {"rates", std::string("Writes <out>/<curve>.csv (default out: rates/).\n  1-D columns: ") +
                    qkdsim::cli::kRatesColumns + "\n  bb84-gad, dual-rail-gad columns: " +
                    qkdsim::cli::kGridColumns},
      {"verify", "Prints PASS/FAIL per closed-form operation; exit 1 on any mismatch."},
      {"shots", std::string("Writes shots.csv by default, first line '# seed=... profile=...'.\n"
                            "  Columns: ") +
                    qkdsim::cli::kShotsColumns},
      {"sweep-beta", std::string("Writes sweep_beta.csv by default.\n  Columns: ") +
                         qkdsim::cli::kSweepBetaColumns},
  };
  const std::map<std::string, std::string> descriptions = {
      {"rates", "analytic secure-key-rate curves against gamma"},
      {"verify", "closed forms against the density-matrix simulation"},
      {"shots", "Monte Carlo QBER against identity-gate delay"},
      {"sweep-beta", "dual-rail rates against CNOT failure probability at fixed gamma"},
  };
  for (const auto& [name, text] : descriptions) {
    CLI::App* sub = app.add_subcommand(name, text);
    sub->fallthrough();
    sub->footer(footers.at(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Config config;
  try {
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& [key, value] : per_key) {
      if (app.count("--" + key) > 0) config.set(key, value);
    }
    for (const auto& [flag, key] :
         std::map<std::string, std::string>{{"--out", "output.path"},
                                            {"--seed", "run.seed"},
                                            {"--profile", "profile.name"},
                                            {"--points", "sweep.points"}}) {
      if (app.count(flag) > 0) config.set(key, overrides[key]);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return qkdsim::cli::run_command(command, config, std::cout, std::cerr);
}
