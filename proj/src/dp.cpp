// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/dp.hpp"

#include <algorithm>
#include <cmath>

#include "qlsm/error.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

namespace {

// E[v(X_{t+1}) | X_t = i] for every state of step t (t = 0 gives one entry).
std::vector<double> expect_next(const MarkovChain& chain, int t, const std::vector<double>& v) {
  if (t == 0) {
    const auto& init = chain.initial_distribution();
    std::vector<double> terms(init.size());
    for (std::size_t j = 0; j < init.size(); ++j) terms[j] = init[j] * v[j];
    return {pairwise_sum(terms)};
  }
  const auto& p = chain.transition(t);
  std::vector<double> out(static_cast<std::size_t>(p.rows()));
  std::vector<double> terms(static_cast<std::size_t>(p.cols()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) terms[static_cast<std::size_t>(j)] = p(i, j) * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = pairwise_sum(terms);
  }
  return out;
}

}  // namespace

SnellTable snell_envelope(const MarkovChain& chain, const Payoff& payoff, std::size_t cap) {
  const int horizon = chain.horizon();
  if (payoff.horizon() != horizon) throw InvalidArgument("payoff horizon does not match chain");
  SnellTable tab;
  tab.horizon = horizon;
  tab.z0 = payoff.z0();
  tab.paths = enumerate_paths(chain, cap);
  tab.value.resize(static_cast<std::size_t>(horizon));
  tab.continuation.resize(static_cast<std::size_t>(horizon - 1));
  tab.stop.resize(static_cast<std::size_t>(horizon));

  tab.value.back() = payoff.values(horizon);
  tab.stop.back().assign(payoff.values(horizon).size(), 1);
  for (int t = horizon - 1; t >= 1; --t) {
    auto cont = expect_next(chain, t, tab.value[static_cast<std::size_t>(t)]);
    const auto& z = payoff.values(t);
    auto& u = tab.value[static_cast<std::size_t>(t - 1)];
    auto& s = tab.stop[static_cast<std::size_t>(t - 1)];
    u.resize(z.size());
    s.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      s[i] = z[i] >= cont[i];
      u[i] = s[i] ? z[i] : cont[i];
    }
    tab.continuation[static_cast<std::size_t>(t - 1)] = std::move(cont);
  }
  tab.continuation0 = expect_next(chain, 0, tab.value[0])[0];
  tab.u0 = std::max(tab.z0, tab.continuation0);
  tab.stopping_times = optimal_stopping_times(tab);
  return tab;
}

std::vector<std::vector<int>> optimal_stopping_times(const SnellTable& table) {
  const int horizon = table.horizon;
  std::vector<std::vector<int>> out;
  out.reserve(table.paths.size());
  for (const auto& path : table.paths) {
    std::vector<int> tau(static_cast<std::size_t>(horizon + 1));
    tau[static_cast<std::size_t>(horizon)] = horizon;
    for (int t = horizon - 1; t >= 1; --t) {
      const bool stop = table.stop[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(path.states[static_cast<std::size_t>(t - 1)])];
      tau[static_cast<std::size_t>(t)] = stop ? t : tau[static_cast<std::size_t>(t + 1)];
    }
    tau[0] = table.z0 >= table.continuation0 ? 0 : tau[1];
    out.push_back(std::move(tau));
  }
  return out;
}

StoppingRule exact_rule(const SnellTable& table) { return StoppingRule{table.continuation}; }

StoppingRule coefficient_rule(const Basis& basis, const MarkovChain& chain, const std::vector<Eigen::VectorXd>& alpha) {
  if (static_cast<int>(alpha.size()) != chain.horizon() - 1) throw InvalidArgument("need T-1 coefficient vectors");
  const BasisTable table(basis, chain);
  StoppingRule rule;
  for (int t = 1; t < chain.horizon(); ++t) {
    const auto& a = alpha[static_cast<std::size_t>(t - 1)];
    if (a.size() != basis.size()) throw InvalidArgument("coefficient size mismatch");
    std::vector<double> f(chain.grid_size(t));
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto e = table.row(t, static_cast<int>(i));
      double s = 0.0;
      for (int k = 0; k < basis.size(); ++k) s += a(k) * e[static_cast<std::size_t>(k)];
      f[i] = s;
    }
    rule.f.push_back(std::move(f));
  }
  return rule;
}

std::vector<std::vector<double>> conditional_payoff(const MarkovChain& chain, const Payoff& payoff, const StoppingRule& rule) {
  const int horizon = chain.horizon();
  if (static_cast<int>(rule.f.size()) != horizon - 1) throw InvalidArgument("rule needs T-1 steps");
  std::vector<std::vector<double>> g(static_cast<std::size_t>(horizon));
  // w holds E[Z_{tau_s} | X_s] while sweeping s downward.
  std::vector<double> w = payoff.values(horizon);
  for (int s = horizon - 1; s >= 0; --s) {
    auto next = expect_next(chain, s, w);
    if (s >= 1) {
      const auto& z = payoff.values(s);
      const auto& f = rule.f[static_cast<std::size_t>(s - 1)];
      if (f.size() != z.size()) throw InvalidArgument("rule grid size mismatch");
      std::vector<double> ws(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) ws[i] = z[i] >= f[i] ? z[i] : next[i];
      g[static_cast<std::size_t>(s)] = std::move(next);
      w = std::move(ws);
    } else {
      g[0] = std::move(next);
    }
  }
  return g;
}

double l2_distance(const MarkovChain& chain, int t, const std::vector<double>& f, const std::vector<double>& g) {
  if (t == 0) return std::abs(f.at(0) - g.at(0));
  const auto rho = image_measure(chain, t);
  if (f.size() != rho.size() || g.size() != rho.size()) throw InvalidArgument("l2_distance size mismatch");
  std::vector<double> terms(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) terms[i] = rho[i] * (f[i] - g[i]) * (f[i] - g[i]);
  return std::sqrt(pairwise_sum(terms));
}

ProjectionResult exact_approximation_error(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int t,
                                           const StoppingRule& rule) {
  if (t < 1 || t >= chain.horizon()) throw InvalidArgument("projection step must lie in 1..T-1");
  const auto g = conditional_payoff(chain, payoff, rule)[static_cast<std::size_t>(t)];
  const auto rho = image_measure(chain, t);
  const auto& grid = chain.grid(t);
  const int m = basis.size();
  std::vector<double> e(static_cast<std::size_t>(m));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    basis.values(t, grid.point(i), e);
    const Eigen::Map<const Eigen::VectorXd> v(e.data(), m);
    a.noalias() += rho[i] * v * v.transpose();
    b += rho[i] * g[i] * v;
  }
  ProjectionResult r;
  r.sigma_min = sigma_min(a);
  r.coefficients = solve_gram(a, b, t);
  std::vector<double> fit(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    basis.values(t, grid.point(i), e);
    fit[i] = Eigen::Map<const Eigen::VectorXd>(e.data(), m).dot(r.coefficients);
  }
  r.residual = l2_distance(chain, t, fit, g);
  return r;
}

double max_approximation_error(const MarkovChain& chain, const Payoff& payoff, const Basis& basis) {
  const SnellTable tab = snell_envelope(chain, payoff);
  const StoppingRule rule = exact_rule(tab);
  double worst = 0.0;
  for (int t = 1; t < chain.horizon(); ++t)
    worst = std::max(worst, exact_approximation_error(chain, payoff, basis, t, rule).residual);
  return worst;
}

}  // namespace qlsm
