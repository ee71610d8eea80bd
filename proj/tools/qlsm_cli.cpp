// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "qlsm/qlsm.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBounds = 3;

int fail(qlsm_status s) {
  std::fprintf(stderr, "qlsm: %s: %s\n", qlsm_status_string(s), qlsm_last_error());
  return s == QLSM_CONFIG_ERROR ? kExitConfig : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-squares Monte Carlo experiments: classical and simulated quantum"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  bool strict = false;

  struct Cmd {
    const char* name;
    const char* help;
    qlsm_status (*fn)(const qlsm_config*, qlsm_report**);
  };
  const Cmd cmds[] = {
      {"price", "run the selected algorithms against the exact oracle", qlsm_run_price},
      {"scaling", "fit cost against 1/epsilon for both algorithms", qlsm_run_scaling},
      {"validate-bounds", "check the error and singular-value bounds", qlsm_run_validate_bounds},
      {"dump-oracle", "write the exact Snell envelope table", qlsm_run_dump_oracle},
  };
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed base override");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--trials", trials, "trial count override")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", strict, "exit 3 when a bound check fails");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const Cmd* chosen = nullptr;
  for (const auto& c : cmds)
    if (app.got_subcommand(c.name)) chosen = &c;

  qlsm_config* config = nullptr;
  qlsm_status s = qlsm_config_load(config_path.c_str(), &config);
  if (s != QLSM_OK) return fail(s);
  if (seed) qlsm_config_set_seed(config, *seed);
  if (trials && (s = qlsm_config_set_trials(config, *trials)) != QLSM_OK) {
    qlsm_config_destroy(config);
    return fail(s);
  }
  qlsm_report* report = nullptr;
  s = chosen->fn(config, &report);
  qlsm_config_destroy(config);
  if (s != QLSM_OK) return fail(s);
  s = qlsm_report_write(report, out_dir.c_str());
  const bool passed = qlsm_report_all_passed(report) != 0;
  qlsm_report_destroy(report);
  if (s != QLSM_OK) return fail(s);
  std::printf("%s: wrote %s/%s.json (%s)\n", chosen->name, out_dir.c_str(), chosen->name,
              passed ? "all checks passed" : "some checks failed");
  return strict && !passed ? kExitBounds : 0;
}
