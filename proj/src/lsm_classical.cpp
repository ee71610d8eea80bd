// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/lsm_classical.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

#include "qlsm/error.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const Eigen::MatrixXd& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Eigen::VectorXd r = a.row(i).transpose();
    rows.push_back(vec_json(r));
  }
  return rows;
}

LsmRun run_lsm(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int n_paths, std::uint64_t seed,
               const LsmOptions& options, GramSource source) {
  const int horizon = chain.horizon();
  const int m = basis.size();
  if (n_paths < 1) throw InvalidArgument("N must be positive");
  if (source == GramSource::kSampled && horizon > 1 && n_paths < m)
    throw InvalidArgument("N must be at least the basis size");
  if (payoff.horizon() != horizon) throw InvalidArgument("payoff horizon does not match chain");
  if (options.shared_rounding) check_format(*options.shared_rounding);

  LsmRun run;
  run.n_paths = n_paths;
  run.horizon = horizon;
  run.basis_size = m;
  run.seed = seed;
  run.gram_source = source;
  run.shared_rounding = options.shared_rounding;
  run.z0 = payoff.z0();

  const auto n = static_cast<std::size_t>(n_paths);
  run.paths.resize(n);
  for (std::size_t i = 0; i < n; ++i) run.paths[i] = sample_path(chain, seed, i);
  run.path_samples = n;

  const BasisTable table(basis, chain);
  run.stopping_times.assign(n, std::vector<int>(static_cast<std::size_t>(horizon), horizon));
  auto state_at = [&](std::size_t i, int t) { return run.paths[i].states[static_cast<std::size_t>(t - 1)]; };
  auto tau_at = [&](std::size_t i, int t) -> int& { return run.stopping_times[i][static_cast<std::size_t>(t - 1)]; };
  auto target = [&](std::size_t i, int t) {
    const int s = tau_at(i, t);
    return payoff.value(s, state_at(i, s));
  };

  const auto um = static_cast<std::size_t>(std::max(0, horizon - 1));
  run.gram.resize(um);
  run.rhs.resize(um);
  run.alpha.resize(um);
  for (int t = horizon - 1; t >= 1; --t) {
    Eigen::MatrixXd a;
    if (source == GramSource::kClosedForm) {
      auto closed = closed_form_gram(basis, static_cast<double>(t));
      if (!closed) throw InvalidArgument("basis has no closed-form Gram matrix");
      a = *closed;
    } else {
      a = pairwise_reduce(n, m, m, [&](std::size_t i, Eigen::MatrixXd& acc) {
        const auto e = table.row(t, state_at(i, t));
        const Eigen::Map<const Eigen::VectorXd> v(e.data(), m);
        acc.noalias() += v * v.transpose();
      });
      a /= static_cast<double>(n);
      run.basis_queries += n * static_cast<std::uint64_t>(m);
    }
    Eigen::VectorXd b = pairwise_reduce(n, m, 1, [&](std::size_t i, Eigen::MatrixXd& acc) {
      const auto e = table.row(t, state_at(i, t));
      const Eigen::Map<const Eigen::VectorXd> v(e.data(), m);
      acc.col(0).noalias() += target(i, t + 1) * v;
    }).col(0);
    b /= static_cast<double>(n);
    run.basis_queries += n * static_cast<std::uint64_t>(m);
    run.payoff_queries += n;

    Eigen::VectorXd alpha = solve_gram(a, b, t);
    for (std::size_t i = 0; i < n; ++i) {
      const int s = state_at(i, t);
      if (stop_decision(payoff.value(t, s), alpha, table.row(t, s), options.shared_rounding)) tau_at(i, t) = t;
      else tau_at(i, t) = tau_at(i, t + 1);
    }
    run.payoff_queries += n;
    run.basis_queries += n * static_cast<std::uint64_t>(m);
    run.gram[static_cast<std::size_t>(t - 1)] = std::move(a);
    run.rhs[static_cast<std::size_t>(t - 1)] = std::move(b);
    run.alpha[static_cast<std::size_t>(t - 1)] = std::move(alpha);
  }

  std::vector<double> finals(n);
  for (std::size_t i = 0; i < n; ++i) finals[i] = target(i, 1);
  run.payoff_queries += n;
  run.continuation = pairwise_sum(finals) / static_cast<double>(n);
  run.estimate = std::max(run.z0, run.continuation);
  return run;
}

}  // namespace

bool stop_decision(double z, const Eigen::VectorXd& alpha, std::span<const double> e,
                   const std::optional<FixedPointFormat>& rounding) {
  if (!rounding) {
    double f = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k) f += alpha[k] * e[static_cast<std::size_t>(k)];
    return z >= f;
  }
  std::vector<FixedPoint> qa, qe;
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    qa.push_back(FixedPoint::encode(alpha[k], *rounding));
    qe.push_back(FixedPoint::encode(e[static_cast<std::size_t>(k)], *rounding));
  }
  return fixed_stop(FixedPoint::encode(z, *rounding), fixed_dot(qa, qe, *rounding));
}

std::vector<int> stopping_times_for_path(const Payoff& payoff, const BasisTable& table, const Path& path,
                                         const std::vector<Eigen::VectorXd>& alpha,
                                         const std::optional<FixedPointFormat>& rounding) {
  const int horizon = payoff.horizon();
  std::vector<int> tau(static_cast<std::size_t>(horizon), horizon);
  for (int t = horizon - 1; t >= 1; --t) {
    const int s = path.states[static_cast<std::size_t>(t - 1)];
    const bool stop = stop_decision(payoff.value(t, s), alpha.at(static_cast<std::size_t>(t - 1)), table.row(t, s), rounding);
    tau[static_cast<std::size_t>(t - 1)] = stop ? t : tau[static_cast<std::size_t>(t)];
  }
  return tau;
}

std::vector<std::vector<int>> recompute_stopping_times(const LsmRun& run, const Payoff& payoff, const Basis& basis,
                                                       const MarkovChain& chain) {
  const BasisTable table(basis, chain);
  std::vector<std::vector<int>> out;
  out.reserve(run.paths.size());
  for (const auto& p : run.paths) out.push_back(stopping_times_for_path(payoff, table, p, run.alpha, run.shared_rounding));
  return out;
}

LsmRun run_classical_lsm(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int n_paths,
                         std::uint64_t seed, const LsmOptions& options) {
  return run_lsm(chain, payoff, basis, n_paths, seed, options, GramSource::kSampled);
}

LsmRun run_classical_lsm_fixed_gram(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, int n_paths,
                                    std::uint64_t seed, const LsmOptions& options) {
  return run_lsm(chain, payoff, basis, n_paths, seed, options, GramSource::kClosedForm);
}

std::int64_t choose_N(int m, double eps0, double delta) {
  if (m < 1) throw InvalidArgument("m must be positive");
  if (!(eps0 > 0.0)) throw InvalidArgument("eps0 must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must be in (0,1)");
  const double mm = static_cast<double>(m) * m;
  return ceil_tolerant(mm / (2.0 * eps0 * eps0) * std::log(6.0 * mm / delta));
}

nlohmann::json LsmRun::to_json(bool include_paths) const {
  nlohmann::json j;
  j["N"] = n_paths;
  j["horizon"] = horizon;
  j["basis_size"] = basis_size;
  j["seed"] = seed;
  j["gram_source"] = gram_source == GramSource::kSampled ? "sampled" : "closed_form";
  if (shared_rounding)
    j["shared_rounding"] = {{"integer_bits", shared_rounding->integer_bits},
                            {"fraction_bits", shared_rounding->fraction_bits}};
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < alpha.size(); ++i)
    steps.push_back({{"t", i + 1}, {"gram", mat_json(gram[i])}, {"rhs", vec_json(rhs[i])}, {"alpha", vec_json(alpha[i])}});
  j["steps"] = steps;
  j["z0"] = z0;
  j["continuation"] = continuation;
  j["estimate"] = estimate;
  j["path_samples"] = path_samples;
  j["payoff_queries"] = payoff_queries;
  j["basis_queries"] = basis_queries;
  if (include_paths) {
    nlohmann::json ps = nlohmann::json::array();
    for (std::size_t i = 0; i < paths.size(); ++i)
      ps.push_back({{"states", paths[i].states}, {"stopping_times", stopping_times[i]}});
    j["paths"] = ps;
  }
  return j;
}

}  // namespace qlsm
