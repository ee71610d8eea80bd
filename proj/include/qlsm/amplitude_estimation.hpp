// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "qlsm/hybrid_state.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

bool is_power_of_two(long long m);

// sin^2(pi y / M)
double ae_estimate(int outcome, int m);

// Outcome distribution of M-query phase-estimation AE for good amplitude a.
std::vector<double> ae_distribution(double a, int m);

// The same distribution from a dense statevector simulation of the phase
// register, path register and rotation qubit. good_ratio[x] is the
// probability of the qubit reading 1 on path x. At most 12 qubits.
std::vector<double> ae_distribution_statevector(const std::vector<double>& path_prob,
                                                const std::vector<double>& good_ratio, int m);

struct AeResult {
  int outcome = 0;
  double estimate = 0.0;
};

// Draws one outcome from ae_distribution(a, m) without materializing it.
AeResult ae_sample(double a, int m, Rng& rng);

// Samples AE on the good amplitude of a prepared state. Books M Grover
// iterates and 2M + 1 copies of `prep_cost` (A once, then A and A^dagger
// inside every iterate).
AeResult amplitude_estimation(double a, int m, const QueryLedger& prep_cost, QueryLedger& ledger, Rng& rng);
AeResult amplitude_estimation(const HybridState& prepared, int m, const QueryLedger& prep_cost, QueryLedger& ledger,
                              Rng& rng);

}  // namespace qlsm
