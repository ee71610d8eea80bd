// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/payoff.hpp"

#include <algorithm>
#include <cmath>

#include "qlsm/error.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

namespace {

void check_values(double z0, const std::vector<std::vector<double>>& values) {
  if (!(z0 >= 0.0)) throw InvalidArgument("payoff must be non-negative (t=0)");
  for (std::size_t t = 0; t < values.size(); ++t)
    for (double v : values[t])
      if (!(v >= 0.0)) throw InvalidArgument("payoff must be non-negative (t=" + std::to_string(t + 1) + ")");
}

double grid_max(const std::vector<std::vector<double>>& values) {
  double r = 0.0;
  for (const auto& row : values)
    for (double v : row) r = std::max(r, std::abs(v));
  return r;
}

void check_scalar_model(const MarkovChain& chain, double strike) {
  if (!(strike > 0.0)) throw InvalidArgument("strike must be positive");
  if (chain.dimension() != 1) throw InvalidArgument("put/call payoffs need d = 1");
}

}  // namespace

Payoff Payoff::from_values(double z0, std::vector<std::vector<double>> values, std::optional<double> declared_bound,
                           std::string name) {
  if (values.empty()) throw InvalidArgument("payoff needs at least one step");
  check_values(z0, values);
  Payoff p;
  p.name_ = std::move(name);
  p.z0_ = z0;
  p.values_ = std::move(values);
  const double r = grid_max(p.values_);
  if (declared_bound) {
    if (*declared_bound < r) throw InvalidArgument("declared payoff bound below grid maximum");
    p.bound_ = *declared_bound;
  } else {
    p.bound_ = r;
  }
  return p;
}

Payoff Payoff::from_function(const MarkovChain& chain, const PayoffFn& fn, std::optional<double> declared_bound,
                             std::string name) {
  std::vector<std::vector<double>> values;
  for (int t = 1; t <= chain.horizon(); ++t) {
    const auto& g = chain.grid(t);
    std::vector<double> row(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) row[i] = fn(t, g.point(i));
    values.push_back(std::move(row));
  }
  return from_values(fn(0, chain.x0()), std::move(values), declared_bound, std::move(name));
}

double truncate_value(double f, double beta) {
  if (std::abs(f) <= beta) return f;
  return f > 0.0 ? beta : -beta;
}

Payoff Payoff::truncated(double beta) const {
  if (!(beta > 0.0)) throw InvalidArgument("truncation level must be positive");
  Payoff p = *this;
  p.z0_ = truncate_value(z0_, beta);
  for (auto& row : p.values_)
    for (double& v : row) v = truncate_value(v, beta);
  p.bound_ = std::min(bound_, beta);
  p.beta_ = beta_ ? std::min(*beta_, beta) : beta;
  return p;
}

Payoff truncate(const Payoff& payoff, double beta) { return payoff.truncated(beta); }

Payoff put_payoff(const MarkovChain& chain, double strike) {
  check_scalar_model(chain, strike);
  return Payoff::from_function(
      chain, [strike](int, std::span<const double> x) { return std::max(0.0, strike - x[0]); }, std::nullopt, "put");
}

Payoff call_payoff(const MarkovChain& chain, double strike) {
  check_scalar_model(chain, strike);
  return Payoff::from_function(
      chain, [strike](int, std::span<const double> x) { return std::max(0.0, x[0] - strike); }, std::nullopt, "call");
}

double payoff_moment(const Payoff& payoff, const MarkovChain& chain, double p) {
  double m = 0.0;
  for (int t = 1; t <= chain.horizon(); ++t) {
    const auto rho = image_measure(chain, t);
    std::vector<double> terms(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) terms[i] = rho[i] * std::pow(std::abs(payoff.value(t, static_cast<int>(i))), p);
    m = std::max(m, pairwise_sum(terms));
  }
  return m;
}

double r_p(const Payoff& payoff, const MarkovChain& chain, double p) {
  if (!(p > 2.0) || std::isinf(p)) throw InvalidArgument("r_p needs 2 < p < inf");
  const double mp = payoff_moment(payoff, chain, p);
  double abs_moment = 0.0;
  for (int t = 1; t < chain.horizon(); ++t) {
    const auto rho = image_measure(chain, t);
    const auto& g = chain.grid(t);
    std::vector<double> terms(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
      double s = 0.0;
      for (double v : g.point(i)) s += std::abs(v);
      terms[i] = rho[i] * s;
    }
    abs_moment = std::max(abs_moment, pairwise_sum(terms));
  }
  return chain.horizon() * std::sqrt(2.0 * mp / (p - 2.0)) + abs_moment;
}

}  // namespace qlsm
