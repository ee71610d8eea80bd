// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <vector>

#include "qlsm/amplitude_estimation.hpp"
#include "qlsm/hybrid_state.hpp"

namespace qlsm {

struct QmcOptions {
  // Known almost-sure bound on |h|. Without it the dyadic intervals cover
  // the full fixed-point range.
  std::optional<double> range_bound;
  bool allow_variance_excess = false;
  // |m - mu| <= c sigma for the classical shift sample, by Chebyshev.
  double chebyshev_c = 3.0;
  int median_constant = 18;
};

struct EstimationReport {
  double estimate = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double exact_mean = 0.0;      // E[Q(h)] over the path basis
  double exact_variance = 0.0;
  bool variance_exceeded = false;
  double rounding_error = 0.0;  // |E[Q(h)] - E[h]| bound from quantization
  int repetitions = 0;          // outer median count
  int inner_repetitions = 0;    // per-interval median count
  int intervals = 0;            // dyadic intervals per sign
  std::vector<int> grover_sizes;
  QueryLedger ledger;
  double reference_cost = 0.0;  // (sigma/eps) ln(1/delta) polylog(sigma/eps)
  double cost_ratio = 0.0;      // Grover iterates / reference_cost

  nlohmann::json to_json() const;
};

// Bounded-variance quantum mean estimation of Q(h(X)) for X ~ p. The
// estimator is a median over ceil(c ln(1/delta)) runs; each run shifts by
// one classical sample, splits into positive and negative parts and sums
// AE estimates over dyadic intervals [2^{j-1}, 2^j] * s.
EstimationReport qmontecarlo(const SamplingOracle& sampler, const FunctionCircuit& h, double epsilon, double delta,
                             double sigma, Rng& rng, const QmcOptions& options = {});

}  // namespace qlsm
