// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlsm/chain.hpp"

namespace qlsm {

// z(t, x); t = 0 is evaluated at x0.
using PayoffFn = std::function<double(int t, std::span<const double> x)>;

// Non-negative payoff process cached on every grid point of a chain.
class Payoff {
 public:
  // R defaults to the grid maximum over t = 1..T.
  static Payoff from_function(const MarkovChain& chain, const PayoffFn& fn, std::optional<double> declared_bound = {},
                              std::string name = "custom");
  static Payoff from_values(double z0, std::vector<std::vector<double>> values, std::optional<double> declared_bound = {},
                            std::string name = "custom");

  const std::string& name() const { return name_; }
  int horizon() const { return static_cast<int>(values_.size()); }
  double z0() const { return z0_; }
  double value(int t, int state) const {
    return values_[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(state)];
  }
  const std::vector<double>& values(int t) const { return values_.at(static_cast<std::size_t>(t - 1)); }
  double bound() const { return bound_; }
  std::optional<double> truncation() const { return beta_; }

  // T_beta: clamp to beta; the bound becomes min(R, beta).
  Payoff truncated(double beta) const;

 private:
  Payoff() = default;

  std::string name_;
  double z0_ = 0.0;
  std::vector<std::vector<double>> values_;
  double bound_ = 0.0;
  std::optional<double> beta_;
};

Payoff put_payoff(const MarkovChain& chain, double strike);
Payoff call_payoff(const MarkovChain& chain, double strike);
Payoff truncate(const Payoff& payoff, double beta);

// Pointwise truncation operator on one value.
double truncate_value(double f, double beta);

// max_{t in 1..T} E|z_t(X_t)|^p
double payoff_moment(const Payoff& payoff, const MarkovChain& chain, double p);

// T sqrt(2 M_p / (p - 2)) + max_{t in 1..T-1} sum_i E|X_{t,i}|
double r_p(const Payoff& payoff, const MarkovChain& chain, double p);

}  // namespace qlsm
