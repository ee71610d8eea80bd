// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/lsm_quantum.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlsm/error.hpp"
#include "qlsm/numeric.hpp"
#include "qlsm/qmontecarlo.hpp"
#include "qlsm/stopping_circuits.hpp"

namespace qlsm {

namespace {

const char* stage_name(GramStage s) {
  switch (s) {
    case GramStage::kEstimated: return "estimated";
    case GramStage::kIdentity: return "identity";
    case GramStage::kClosedForm: return "closed_form";
  }
  return "?";
}

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const Eigen::MatrixXd& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(vec_json(a.row(i).transpose()));
  return rows;
}

nlohmann::json stage_json(const StageSummary& s) {
  return {{"estimations", s.estimations},
          {"ledger", s.ledger.to_json()},
          {"max_rounding_error", s.max_rounding_error},
          {"variance_exceeded", s.variance_exceeded},
          {"max_cost_ratio", s.max_cost_ratio}};
}

void absorb(StageSummary& s, const EstimationReport& r) {
  ++s.estimations;
  s.ledger.add(r.ledger);
  s.max_rounding_error = std::max(s.max_rounding_error, r.rounding_error);
  if (r.variance_exceeded) ++s.variance_exceeded;
  s.max_cost_ratio = std::max(s.max_cost_ratio, r.cost_ratio);
}

// One estimation job: a function circuit plus its accuracy parameters.
struct Job {
  const FunctionCircuit* h = nullptr;
  double eps = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double range = 0.0;
  std::uint64_t seed = 0;
};

std::vector<EstimationReport> run_jobs(const SamplingOracle& sampler, const std::vector<Job>& jobs,
                                       const QuantumLsmOptions& options) {
  std::vector<EstimationReport> out(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const Job& j = jobs[i];
        Rng rng(j.seed);
        QmcOptions o;
        o.range_bound = j.range;
        o.allow_variance_excess = options.allow_variance_excess;
        out[i] = qmontecarlo(sampler, *j.h, j.eps, j.delta, j.sigma, rng, o);
      },
      options.threads);
  return out;
}

QuantumLsmRun run_core(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, double epsilon,
                       double delta, const QuantumLsmOptions& options, GramStage stage) {
  const int horizon = chain.horizon();
  const int m = basis.size();
  if (payoff.horizon() != horizon) throw InvalidArgument("payoff horizon does not match chain");
  QuantumLsmRun run;
  run.gram_stage = stage;
  run.horizon = horizon;
  run.basis_size = m;
  run.schedule = quantum_schedule(horizon, m, epsilon, delta, stage);
  run.z0 = payoff.z0();
  run.payoff_bound = payoff.bound();
  run.truncation = payoff.truncation();
  const BasisNorms norms = basis_norms(basis, chain);
  run.basis_l2 = norms.l2;
  run.basis_sup = norms.sup;

  // Smallest singular value across steps.
  if (horizon > 1) {
    if (options.oracle_sigma_min || stage != GramStage::kEstimated) {
      double s = std::numeric_limits<double>::infinity();
      for (int t = 1; t < horizon; ++t) {
        Eigen::MatrixXd a;
        if (stage == GramStage::kIdentity) a = Eigen::MatrixXd::Identity(m, m);
        else if (stage == GramStage::kClosedForm) a = *closed_form_gram(basis, static_cast<double>(t));
        else a = gram_matrix(basis, chain, t, options.cap).matrix;
        s = std::min(s, sigma_min(a));
      }
      run.sigma_min_lower = s;
      run.sigma_min_from_oracle = stage == GramStage::kEstimated;
      if (run.sigma_min_from_oracle)
        run.warnings.push_back("sigma_min taken from exact Gram matrices; not available to a real run");
    } else {
      if (!options.sigma_min_lower || !(*options.sigma_min_lower > 0.0))
        throw InvalidArgument("sigma_min_lower must be supplied and positive");
      run.sigma_min_lower = *options.sigma_min_lower;
    }
    if (epsilon > run.sigma_min_lower / 2.0)
      throw ScheduleViolation("epsilon " + std::to_string(epsilon) + " exceeds sigma_min/2 = " +
                              std::to_string(run.sigma_min_lower / 2.0));
    if (std::sqrt(static_cast<double>(m)) * run.payoff_bound * run.basis_l2 / run.sigma_min_lower < 1.0)
      run.warnings.push_back("sqrt(m) R L / sigma_min < 1");
  }

  const SamplingOracle sampler(chain, options.cap);
  StoppingCircuit circuit(chain, payoff, basis, options.format);
  const BasisTable table(basis, chain);
  const double floor = options.format.ulp();
  const double sigma_gram = std::max(floor, norms.sup * norms.l2);
  const double range_gram = std::max(floor, norms.sup * norms.sup);
  const double sigma_rhs = std::max(floor, run.payoff_bound * norms.l2);
  const double range_rhs = std::max(floor, run.payoff_bound * std::max(norms.sup, 1.0));
  const double sigma_final = std::max(floor, run.payoff_bound);

  const auto um = static_cast<std::size_t>(std::max(0, horizon - 1));
  run.gram.resize(um);
  run.rhs.resize(um);
  run.alpha.resize(um);
  const auto paths = sampler.paths();

  for (int t = horizon - 1; t >= 1; --t) {
    Eigen::MatrixXd a(m, m);
    if (stage == GramStage::kEstimated) {
      std::vector<FunctionOracle> oracles;
      std::vector<std::pair<int, int>> entries;
      QueryLedger unit;
      unit.add_function("e", 2);
      for (int k = 0; k < m; ++k)
        for (int l = k; l < m; ++l) {
          std::vector<double> vals;
          vals.reserve(paths->size());
          for (const auto& p : *paths) {
            const auto row = table.row(t, p.states[static_cast<std::size_t>(t - 1)]);
            vals.push_back(row[static_cast<std::size_t>(k)] * row[static_cast<std::size_t>(l)]);
          }
          oracles.emplace_back("e*e", vals, options.format, unit);
          entries.emplace_back(k, l);
        }
      std::vector<Job> jobs;
      for (std::size_t i = 0; i < oracles.size(); ++i)
        jobs.push_back({&oracles[i], run.schedule.eps_gram, run.schedule.delta_gram, sigma_gram, range_gram,
                        derive_seed(options.seed, 1, static_cast<std::uint64_t>(t), i)});
      const auto reps = run_jobs(sampler, jobs, options);
      for (std::size_t i = 0; i < reps.size(); ++i) {
        absorb(run.gram_stage_summary, reps[i]);
        a(entries[i].first, entries[i].second) = reps[i].estimate;
        a(entries[i].second, entries[i].first) = reps[i].estimate;
      }
    } else if (stage == GramStage::kIdentity) {
      a = Eigen::MatrixXd::Identity(m, m);
    } else {
      a = *closed_form_gram(basis, static_cast<double>(t));
    }

    // b_{t,k} = E[Z_{tau_{t+1}} e_{t,k}(X_t)] through C_{t+1}^{(k)}.
    std::vector<StoppingFunction> fns;
    for (int k = 0; k < m; ++k) fns.emplace_back(circuit, t + 1, k);
    std::vector<Job> jobs;
    for (int k = 0; k < m; ++k)
      jobs.push_back({&fns[static_cast<std::size_t>(k)], run.schedule.eps_rhs, run.schedule.delta_rhs, sigma_rhs,
                      range_rhs, derive_seed(options.seed, 2, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k))});
    const auto reps = run_jobs(sampler, jobs, options);
    Eigen::VectorXd b(m);
    for (int k = 0; k < m; ++k) {
      absorb(run.rhs_stage_summary, reps[static_cast<std::size_t>(k)]);
      b[k] = reps[static_cast<std::size_t>(k)].estimate;
    }
    Eigen::VectorXd alpha = solve_gram(a, b, t);
    circuit.set_alpha(t, alpha);
    run.gram[static_cast<std::size_t>(t - 1)] = std::move(a);
    run.rhs[static_cast<std::size_t>(t - 1)] = std::move(b);
    run.alpha[static_cast<std::size_t>(t - 1)] = std::move(alpha);
  }

  const StoppingFunction final_fn(circuit, 1, 0);
  const auto fin = run_jobs(sampler,
                            {{&final_fn, run.schedule.eps_final, run.schedule.delta_final, sigma_final,
                              std::max(floor, run.payoff_bound), derive_seed(options.seed, 3)}},
                            options);
  absorb(run.final_stage_summary, fin[0]);
  run.final_estimate = fin[0].estimate;
  run.estimate = std::max(run.z0, run.final_estimate);

  run.ledger.add(run.gram_stage_summary.ledger);
  run.ledger.add(run.rhs_stage_summary.ledger);
  run.ledger.add(run.final_stage_summary.ledger);
  run.cost = run.ledger.cost(horizon, options.weights);
  return run;
}

double log_five_pow(int horizon) { return horizon * std::log(5.0); }

LambdaCheck brownian_lambda(const SmoothnessScheduleInput& in) {
  const double n = in.n, d = in.d, T = in.horizon;
  const double l5e = log_five_pow(in.horizon) - std::log(in.epsilon);  // ln(5^T / eps)
  LambdaCheck c;
  c.terms.push_back(std::sqrt(T) * std::exp(l5e / (2.0 * n)));
  const double log_arg = (2.0 * d / n) * (2.0 * n + std::log(in.c)) + std::log(in.payoff_bound) + std::log(d) +
                         (1.0 + 2.0 * d / n) * l5e;
  c.terms.push_back(T * log_arg);
  c.terms.push_back(std::pow(in.r_p / in.epsilon, in.p / (in.p - 2.0)));
  c.required = *std::max_element(c.terms.begin(), c.terms.end());
  c.actual = in.lambda;
  c.satisfied = c.actual >= c.required;
  return c;
}

LambdaCheck gbm_lambda(const SmoothnessScheduleInput& in) {
  const double n = in.n, d = in.d, T = in.horizon;
  const double l5e = log_five_pow(in.horizon) - std::log(in.epsilon);
  const double growth = std::exp((l5e + std::log(in.c)) / n);  // (5^T C / eps)^{1/n}
  LambdaCheck c;
  c.log_scale = true;
  c.terms.push_back(T * std::sqrt(d) * growth);
  const double log_arg = (4.0 * d / n) * (2.0 * n * std::log(2.0) + std::log(in.c)) + 27.0 * T * d * growth * growth +
                         std::log(in.payoff_bound) + (1.0 + 6.0 * d / n) * l5e;
  c.terms.push_back(std::sqrt(std::max(0.0, log_arg)));
  c.terms.push_back(in.p / (in.p - 2.0) * std::log(in.r_p / in.epsilon));
  c.required = *std::max_element(c.terms.begin(), c.terms.end());
  c.actual = std::log(in.lambda);
  c.satisfied = c.actual >= c.required;
  return c;
}

QuantumLsmRun run_model(const MarkovChain& chain, const Payoff& payoff, const ModelRunInput& in,
                        const QuantumLsmOptions& options, bool gbm) {
  if (in.d != chain.dimension()) throw InvalidArgument("model dimension does not match chain");
  if (!(in.p > 2.0)) throw InvalidArgument("p must exceed 2");
  const double beta = in.beta.value_or(std::pow(in.lambda, 2.0 / in.p));
  const Payoff truncated = payoff.truncated(beta);
  const Basis basis = gbm ? Basis::gbm(in.d, in.q, in.lambda) : Basis::hermite(in.d, in.q, in.lambda);
  double eps = in.epsilon;
  std::optional<LambdaCheck> check;
  std::vector<std::string> warnings;
  if (in.target) {
    SmoothnessScheduleInput s;
    s.model = gbm ? SmoothnessModel::kGbm : SmoothnessModel::kBrownian;
    s.horizon = chain.horizon();
    s.d = in.d;
    s.n = in.target->n;
    s.c = in.target->c;
    s.lambda = in.lambda;
    s.epsilon = in.epsilon;
    s.payoff_bound = truncated.bound();
    s.p = in.p;
    s.r_p = r_p(payoff, chain, in.p);
    const auto sched = schedule_from_smoothness(s);
    eps = sched.eps0;
    check = sched.lambda;
    if (in.q < sched.q)
      warnings.push_back("q = " + std::to_string(in.q) + " below scheduled q = " + std::to_string(sched.q));
    if (check && !check->satisfied)
      warnings.push_back("lambda below schedule; required " + std::string(check->log_scale ? "ln lambda >= " : "lambda >= ") +
                         std::to_string(check->required));
  }
  auto run = run_core(chain, truncated, basis, eps, in.delta, options,
                      gbm ? GramStage::kClosedForm : GramStage::kIdentity);
  if (gbm)
    for (int t = 1; t < chain.horizon(); ++t) {
      const double s = sigma_min(*closed_form_gram(basis, static_cast<double>(t)));
      if (s * vandermonde_sigma_min_bound(in.q, in.d, static_cast<double>(t)).sharp < 1.0 - 1e-9)
        run.warnings.push_back("closed-form Gram sigma_min below the Vandermonde bound at t = " + std::to_string(t));
    }
  run.lambda_check = check;
  run.warnings.insert(run.warnings.end(), warnings.begin(), warnings.end());
  return run;
}

}  // namespace

QuantumSchedule quantum_schedule(int horizon, int m, double epsilon, double delta, GramStage stage) {
  if (horizon < 1 || m < 1) throw InvalidArgument("horizon and m must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must be in (0,1)");
  const double T = horizon, mm = m;
  QuantumSchedule s;
  s.epsilon = epsilon;
  s.delta = delta;
  s.eps_gram = epsilon / mm;
  s.eps_rhs = epsilon / std::sqrt(mm);
  s.delta_gram = delta / (4.0 * T * mm * mm);
  s.delta_rhs = stage == GramStage::kEstimated ? delta / (4.0 * T * mm) : delta / (2.0 * T * mm);
  s.eps_final = epsilon;
  s.delta_final = delta / 2.0;
  return s;
}

QuantumLsmRun run_quantum_lsm(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, double epsilon,
                              double delta, const QuantumLsmOptions& options) {
  return run_core(chain, payoff, basis, epsilon, delta, options, GramStage::kEstimated);
}

QuantumLsmRun run_quantum_lsm_brownian(const MarkovChain& chain, const Payoff& payoff, const ModelRunInput& input,
                                       const QuantumLsmOptions& options) {
  return run_model(chain, payoff, input, options, false);
}

QuantumLsmRun run_quantum_lsm_gbm(const MarkovChain& chain, const Payoff& payoff, const ModelRunInput& input,
                                  const QuantumLsmOptions& options) {
  return run_model(chain, payoff, input, options, true);
}

SmoothnessSchedule schedule_from_smoothness(const SmoothnessScheduleInput& in) {
  if (in.horizon < 1 || in.d < 1) throw InvalidArgument("horizon and d must be positive");
  if (!(in.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const double T = in.horizon, d = in.d, n = in.n;
  const double five = std::pow(5.0, T);
  SmoothnessSchedule s;
  auto check_n = [&] {
    if (in.n < 1) throw InvalidArgument("smoothness order n must be positive");
    if (!(in.c > 0.0)) throw InvalidArgument("C must be positive");
    if (in.n >= s.q)
      throw Inconsistent("smoothness order n = " + std::to_string(in.n) + " is not below q = " + std::to_string(s.q));
  };
  const double r = in.payoff_bound, l2 = in.basis_l2 * in.basis_l2, sig2 = in.sigma_min * in.sigma_min;
  switch (in.model) {
    case SmoothnessModel::kSmooth:
      s.q = static_cast<int>(ceil_tolerant(std::pow(2.0 * five * in.c / in.epsilon, 1.0 / n)));
      check_n();
      s.eps0 = sig2 / (4.0 * std::pow(std::exp(2.0 * n) * in.c, d / n) * r * l2) *
               std::pow(in.epsilon / (2.0 * five), 1.0 + d / n);
      s.m = static_cast<int>(binomial(s.q + in.d, in.d));
      break;
    case SmoothnessModel::kLipschitz: {
      s.q = static_cast<int>(ceil_tolerant(176.0 * five * in.lambda * in.c_lipschitz * d / in.epsilon));
      const double base = 176.0 * std::exp(2.0) * in.lambda * in.c_lipschitz * d;
      s.eps0 = sig2 / (4.0 * std::pow(base, d) * r * l2) * std::pow(in.epsilon / (2.0 * five), 1.0 + d);
      s.m = static_cast<int>(binomial(s.q + in.d, in.d));
      break;
    }
    case SmoothnessModel::kBrownian:
      s.q = static_cast<int>(ceil_tolerant(std::pow(3.0 * five * in.c / in.epsilon, 1.0 / n)));
      check_n();
      s.eps0 = 1.0 / (3.0 * std::pow(std::exp(2.0 * n) * in.c, d / n) * r) *
               std::pow(in.epsilon / (3.0 * five), 1.0 + d / n);
      s.m = static_cast<int>(binomial(s.q + in.d, in.d));
      if (in.r_p > 0.0 && in.p > 2.0) s.lambda = brownian_lambda(in);
      break;
    case SmoothnessModel::kGbm: {
      s.q = static_cast<int>(ceil_tolerant(std::pow(3.0 * five * in.c / in.epsilon, 1.0 / n)));
      check_n();
      const double growth = std::pow(five * in.c / in.epsilon, 2.0 / n);
      s.eps0 = std::exp(-27.0 * T * d * growth) / (std::pow(2.0, 2.0 * d + 2.0) * std::pow(in.c, 5.0 * d / n) * r) *
               std::pow(in.epsilon / (3.0 * five), 1.0 + 5.0 * d / n);
      s.m = static_cast<int>(std::pow(s.q + 1, in.d));
      if (in.r_p > 0.0 && in.p > 2.0) s.lambda = gbm_lambda(in);
      break;
    }
  }
  return s;
}

nlohmann::json QuantumLsmRun::to_json() const {
  nlohmann::json j;
  j["schedule"] = {{"epsilon", schedule.epsilon},         {"delta", schedule.delta},
                   {"eps_gram", schedule.eps_gram},       {"eps_rhs", schedule.eps_rhs},
                   {"delta_gram", schedule.delta_gram},   {"delta_rhs", schedule.delta_rhs},
                   {"eps_final", schedule.eps_final},     {"delta_final", schedule.delta_final}};
  j["gram_stage"] = stage_name(gram_stage);
  j["horizon"] = horizon;
  j["basis_size"] = basis_size;
  j["sigma_min_lower"] = sigma_min_lower;
  j["sigma_min_from_oracle"] = sigma_min_from_oracle;
  j["R"] = payoff_bound;
  j["L"] = basis_l2;
  j["L_sup"] = basis_sup;
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < alpha.size(); ++i)
    steps.push_back({{"t", i + 1}, {"gram", mat_json(gram[i])}, {"rhs", vec_json(rhs[i])}, {"alpha", vec_json(alpha[i])}});
  j["steps"] = steps;
  j["z0"] = z0;
  j["final_estimate"] = final_estimate;
  j["estimate"] = estimate;
  j["stages"] = {{"gram", stage_json(gram_stage_summary)},
                 {"rhs", stage_json(rhs_stage_summary)},
                 {"final", stage_json(final_stage_summary)}};
  j["ledger"] = ledger.to_json();
  j["cost"] = cost;
  if (lambda_check)
    j["lambda_check"] = {{"terms", lambda_check->terms},
                         {"required", lambda_check->required},
                         {"actual", lambda_check->actual},
                         {"log_scale", lambda_check->log_scale},
                         {"satisfied", lambda_check->satisfied}};
  if (truncation) j["truncation"] = *truncation;
  j["warnings"] = warnings;
  return j;
}

}  // namespace qlsm
