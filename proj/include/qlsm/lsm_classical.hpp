// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <vector>

#include "qlsm/basis.hpp"
#include "qlsm/chain.hpp"
#include "qlsm/fixed_point.hpp"
#include "qlsm/payoff.hpp"

namespace qlsm {

enum class GramSource { kSampled, kClosedForm };

struct LsmOptions {
  // Stopping comparisons on quantized values via fixed_dot / fixed_stop.
  std::optional<FixedPointFormat> shared_rounding;
};

struct LsmRun {
  int n_paths = 0;
  int horizon = 0;
  int basis_size = 0;
  std::uint64_t seed = 0;
  GramSource gram_source = GramSource::kSampled;
  std::optional<FixedPointFormat> shared_rounding;
  std::vector<Path> paths;
  std::vector<Eigen::MatrixXd> gram;   // [t-1], t = 1..T-1
  std::vector<Eigen::VectorXd> rhs;    // [t-1]
  std::vector<Eigen::VectorXd> alpha;  // [t-1]
  std::vector<std::vector<int>> stopping_times;  // [n][t-1], t = 1..T
  double z0 = 0.0;
  double continuation = 0.0;  // (1/N) sum Z_{tau_1}
  double estimate = 0.0;
  std::uint64_t path_samples = 0;
  std::uint64_t payoff_queries = 0;
  std::uint64_t basis_queries = 0;

  nlohmann::json to_json(bool include_paths = false) const;
};

LsmRun run_classical_lsm(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int n_paths,
                         std::uint64_t seed, const LsmOptions& options = {});

// Same recursion with the closed-form Gram matrix in place of the sampled one.
LsmRun run_classical_lsm_fixed_gram(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int n_paths,
                                    std::uint64_t seed, const LsmOptions& options = {});

// ceil(m^2 / (2 eps0^2) ln(6 m^2 / delta))
std::int64_t choose_N(int m, double eps0, double delta);

// Stop at t iff z_t(x_t) >= alpha_t . e_t(x_t), evaluated in double or in
// the shared fixed-point routine.
bool stop_decision(double z, const Eigen::VectorXd& alpha, std::span<const double> e,
                   const std::optional<FixedPointFormat>& rounding);

// tau_1..tau_T for one path given alpha_1..alpha_{T-1}.
std::vector<int> stopping_times_for_path(const Payoff& payoff, const BasisTable& table, const Path& path,
                                         const std::vector<Eigen::VectorXd>& alpha,
                                         const std::optional<FixedPointFormat>& rounding);

// Reruns the backward recursion from the stored coefficients.
std::vector<std::vector<int>> recompute_stopping_times(const LsmRun& run, const Payoff& payoff, const Basis& basis,
                                                       const MarkovChain& chain);

}  // namespace qlsm
