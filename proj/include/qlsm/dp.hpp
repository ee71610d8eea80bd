// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "qlsm/basis.hpp"
#include "qlsm/chain.hpp"
#include "qlsm/payoff.hpp"

namespace qlsm {

struct SnellTable {
  int horizon = 0;
  double z0 = 0.0;
  double u0 = 0.0;
  double continuation0 = 0.0;                     // E[Z_{tau_1}]
  std::vector<std::vector<double>> value;         // U_t, t = 1..T
  std::vector<std::vector<double>> continuation;  // E[Z_{tau_{t+1}} | X_t], t = 1..T-1
  std::vector<std::vector<char>> stop;            // Z_t >= continuation, t = 1..T
  std::vector<Path> paths;
  std::vector<std::vector<int>> stopping_times;   // per path: tau_0..tau_T
};

SnellTable snell_envelope(const MarkovChain& chain, const Payoff& payoff, std::size_t cap = kDefaultEnumerationCap);

// Per path tau_0..tau_T from the table's stop decisions.
std::vector<std::vector<int>> optimal_stopping_times(const SnellTable& table);

// Continuation estimates f_t on each grid, t = 1..T-1. A state stops at t
// when Z_t >= f_t.
struct StoppingRule {
  std::vector<std::vector<double>> f;
};

StoppingRule exact_rule(const SnellTable& table);
StoppingRule coefficient_rule(const Basis& basis, const MarkovChain& chain, const std::vector<Eigen::VectorXd>& alpha);

// g_t(x) = E[Z_{tau_{t+1}} | X_t = x] under the rule, t = 0..T-1. Entry 0
// holds the single value at x0.
std::vector<std::vector<double>> conditional_payoff(const MarkovChain& chain, const Payoff& payoff, const StoppingRule& rule);

// ||f - g||_{L2(rho_t)}; t = 0 is the point mass at x0.
double l2_distance(const MarkovChain& chain, int t, const std::vector<double>& f, const std::vector<double>& g);

struct ProjectionResult {
  double residual = 0.0;
  Eigen::VectorXd coefficients;
  double sigma_min = 0.0;
};

// min_a ||a . e_t - E[Z_{tau_{t+1}} | X_t]|| by exact normal equations, 1 <= t <= T-1.
ProjectionResult exact_approximation_error(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int t,
                                           const StoppingRule& rule);

// max over t of exact_approximation_error under the optimal rule.
double max_approximation_error(const MarkovChain& chain, const Payoff& payoff, const Basis& basis);

}  // namespace qlsm
