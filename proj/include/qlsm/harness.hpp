// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qlsm/basis.hpp"
#include "qlsm/chain.hpp"
#include "qlsm/fixed_point.hpp"
#include "qlsm/hybrid_state.hpp"
#include "qlsm/payoff.hpp"

namespace qlsm {

struct ExperimentConfig {
  std::string model = "brownian";  // brownian | gbm | custom
  int d = 1;
  int horizon = 3;
  int grid_size = 4;
  double radius = 3.0;
  nlohmann::json custom_chain;  // chain_to_json layout, model = custom

  std::string payoff = "put";  // put | call | constant
  double strike = 1.0;         // strike, or the value for constant
  std::optional<double> beta;

  std::string basis = "polynomial";  // polynomial | hermite | gbm
  int q = 0;
  std::optional<double> lambda;

  std::string algorithm = "both";  // classical | quantum | both | oracle
  double epsilon = 0.1;
  double delta = 0.1;
  // corollary: eps0 = eps sigma^2 / (4 m R L^2); direct: eps0 = eps.
  std::string schedule = "corollary";
  std::optional<double> sigma_min_lower;
  bool oracle_sigma_min = false;
  std::optional<int> n_paths;

  int trials = 1;
  std::uint64_t seed = 0;
  CostWeights weights{};
  FixedPointFormat format{};
  std::vector<double> epsilon_grid;
  int sensitivity_samples = 1000;
  int lemma_instances = 20;
  unsigned threads = 0;

  bool operator==(const ExperimentConfig&) const;
};

// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
// Parse errors carry the line and column from the JSON reader.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate_config(const ExperimentConfig& c);

// Chain, payoff and basis built from a config.
struct Instance {
  MarkovChain chain;
  Payoff payoff;
  Basis basis;
};
Instance build_instance(const ExperimentConfig& c);

struct ExperimentReport {
  std::string command;
  nlohmann::json json;
  std::string csv;
  bool all_passed = true;
};

ExperimentReport cmd_price(const ExperimentConfig& c);
ExperimentReport cmd_scaling(const ExperimentConfig& c);
ExperimentReport cmd_validate_bounds(const ExperimentConfig& c);
ExperimentReport cmd_dump_oracle(const ExperimentConfig& c);

// Writes <command>.json and <command>.csv into out_dir.
void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

// Least-squares slope of log(y) on log(x) with a 95% interval half-width.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;
};
SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

// ||x - x~|| <= (2 / s)(eps_A ||b|| / s + eps_b), s = sigma_min(A).
double sensitivity_bound(double sigma_min_a, double eps_a, double norm_b, double eps_b);

}  // namespace qlsm
