// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlsm/basis.hpp"
#include "qlsm/chain.hpp"
#include "qlsm/hybrid_state.hpp"
#include "qlsm/payoff.hpp"

namespace qlsm {

struct QuantumSchedule {
  double epsilon = 0.0;
  double delta = 0.0;
  double eps_gram = 0.0;    // eps / m
  double eps_rhs = 0.0;     // eps / sqrt(m)
  double delta_gram = 0.0;  // delta / (4 T m^2)
  double delta_rhs = 0.0;   // delta / (4 T m), or delta / (2 T m) with a fixed Gram
  double eps_final = 0.0;   // eps
  double delta_final = 0.0; // delta / 2
};

enum class GramStage { kEstimated, kIdentity, kClosedForm };

QuantumSchedule quantum_schedule(int horizon, int m, double epsilon, double delta, GramStage stage);

struct QuantumLsmOptions {
  // Lower bound on min_t sigma_min(A_t). Required unless oracle_sigma_min.
  std::optional<double> sigma_min_lower;
  // Compute sigma_min from the exact Gram matrices. Only possible because the
  // instance is small enough to enumerate.
  bool oracle_sigma_min = false;
  FixedPointFormat format{};
  CostWeights weights{};
  std::uint64_t seed = 0;
  bool allow_variance_excess = false;
  std::size_t cap = kDefaultEnumerationCap;
  unsigned threads = 0;
};

// Per-stage summary of the mean estimations.
struct StageSummary {
  int estimations = 0;
  QueryLedger ledger;
  double max_rounding_error = 0.0;
  int variance_exceeded = 0;
  double max_cost_ratio = 0.0;
};

struct LambdaCheck {
  std::vector<double> terms;  // unit-constant terms of the O(.) bound
  double required = 0.0;      // max of the terms (log scale for GBM)
  double actual = 0.0;
  bool log_scale = false;
  bool satisfied = false;
};

struct QuantumLsmRun {
  QuantumSchedule schedule;
  GramStage gram_stage = GramStage::kEstimated;
  int horizon = 0;
  int basis_size = 0;
  double sigma_min_lower = 0.0;
  bool sigma_min_from_oracle = false;
  double payoff_bound = 0.0;  // R
  double basis_l2 = 0.0;      // L
  double basis_sup = 0.0;
  std::vector<Eigen::MatrixXd> gram;   // [t-1]
  std::vector<Eigen::VectorXd> rhs;    // [t-1]
  std::vector<Eigen::VectorXd> alpha;  // [t-1]
  double z0 = 0.0;
  double final_estimate = 0.0;  // Z~_{tau~_1}
  double estimate = 0.0;
  StageSummary gram_stage_summary;
  StageSummary rhs_stage_summary;
  StageSummary final_stage_summary;
  QueryLedger ledger;
  double cost = 0.0;
  std::optional<LambdaCheck> lambda_check;
  std::optional<double> truncation;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

QuantumLsmRun run_quantum_lsm(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, double epsilon,
                              double delta, const QuantumLsmOptions& options);

// Smoothness data for the model-specific schedules.
struct SmoothnessInput {
  int n = 1;
  double c = 1.0;
};

struct ModelRunInput {
  int d = 1;
  int q = 1;
  double lambda = 1.0;
  // Used directly as the Algorithm input unless `target` is set, in which
  // case it is the target accuracy and the input is the derived eps0.
  double epsilon = 0.1;
  double delta = 0.1;
  double p = 4.0;
  std::optional<double> beta;  // defaults to lambda^{2/p}
  std::optional<SmoothnessInput> target;
};

// Hermite basis on a Brownian chain, identity Gram, truncated payoffs.
QuantumLsmRun run_quantum_lsm_brownian(const MarkovChain& chain, const Payoff& payoff, const ModelRunInput& input,
                                       const QuantumLsmOptions& options);
// Martingale monomials on a GBM chain, closed-form Gram.
QuantumLsmRun run_quantum_lsm_gbm(const MarkovChain& chain, const Payoff& payoff, const ModelRunInput& input,
                                  const QuantumLsmOptions& options);

enum class SmoothnessModel { kSmooth, kLipschitz, kBrownian, kGbm };

struct SmoothnessScheduleInput {
  SmoothnessModel model = SmoothnessModel::kSmooth;
  int horizon = 1;
  int d = 1;
  int n = 1;
  double c = 1.0;            // C for smooth models
  double c_lipschitz = 1.0;  // C_L
  double lambda = 1.0;
  double epsilon = 0.1;
  double sigma_min = 1.0;
  double payoff_bound = 1.0;  // R
  double basis_l2 = 1.0;      // L
  double p = 4.0;
  double r_p = 0.0;
};

struct SmoothnessSchedule {
  int q = 0;
  int m = 0;
  double eps0 = 0.0;
  std::optional<LambdaCheck> lambda;
};

SmoothnessSchedule schedule_from_smoothness(const SmoothnessScheduleInput& in);

}  // namespace qlsm
