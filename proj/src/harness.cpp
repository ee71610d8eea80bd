// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/harness.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "qlsm/dp.hpp"
#include "qlsm/error.hpp"
#include "qlsm/lsm_classical.hpp"
#include "qlsm/lsm_quantum.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

namespace {

using nlohmann::json;

// ---- config ---------------------------------------------------------------

template <typename T>
T field(const json& j, const char* key, const T& fallback, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

template <typename T>
std::optional<T> opt_field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key + ": " + e.what());
  }
}

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw ConfigError("config." + where + ": " + what);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return true;
  return false;
}

// ---- instance helpers -------------------------------------------------------

double five_pow(int horizon) { return std::pow(5.0, horizon); }

struct Constants {
  int m = 0;
  double r = 0.0;
  double l2 = 0.0;
  double sigma_min = 0.0;  // bound used by the schedules
  bool sigma_from_oracle = false;
  double eps0 = 0.0;
  double eps_effective = 0.0;  // eps in the corollary bound
};

Constants constants(const ExperimentConfig& c, const Instance& in, double eps) {
  Constants k;
  k.m = in.basis.size();
  k.r = in.payoff.bound();
  k.l2 = basis_norms(in.basis, in.chain).l2;
  if (c.sigma_min_lower) {
    k.sigma_min = *c.sigma_min_lower;
  } else if (in.chain.horizon() > 1) {
    k.sigma_min = std::numeric_limits<double>::infinity();
    for (int t = 1; t < in.chain.horizon(); ++t)
      k.sigma_min = std::min(k.sigma_min, sigma_min(gram_matrix(in.basis, in.chain, t).matrix));
    k.sigma_from_oracle = true;
  } else {
    k.sigma_min = 1.0;
  }
  const double scale = 4.0 * k.m * k.r * k.l2 * k.l2 / (k.sigma_min * k.sigma_min);
  if (c.schedule == "corollary" && scale > 0.0) {
    k.eps0 = eps / scale;
    k.eps_effective = eps;
  } else {
    k.eps0 = eps;
    k.eps_effective = scale * eps;
  }
  return k;
}

QuantumLsmOptions quantum_options(const ExperimentConfig& c, const Constants& k, std::uint64_t seed, unsigned threads) {
  QuantumLsmOptions o;
  o.sigma_min_lower = k.sigma_min;
  o.format = c.format;
  o.weights = c.weights;
  o.seed = seed;
  o.threads = threads;
  return o;
}

double classical_cost(const ExperimentConfig& c, int m, std::int64_t n) {
  const double T = c.horizon;
  return static_cast<double>(n) * (T * c.weights.samp + T * c.weights.z + (T - 1.0) * m * c.weights.e);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// Exact E[Z_{tau~_1}] for the stopping rule defined by coefficients.
double tilde_target(const Instance& in, const std::vector<Eigen::VectorXd>& alpha) {
  const auto rule = coefficient_rule(in.basis, in.chain, alpha);
  return conditional_payoff(in.chain, in.payoff, rule)[0][0];
}

double tilde_approx_sum(const Instance& in, const std::vector<Eigen::VectorXd>& alpha) {
  const auto rule = coefficient_rule(in.basis, in.chain, alpha);
  double s = 0.0;
  for (int t = 1; t < in.chain.horizon(); ++t) s += exact_approximation_error(in.chain, in.payoff, in.basis, t, rule).residual;
  return s;
}

// ---- checks -----------------------------------------------------------------

struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = true;
  std::string note;
};

json check_json(const Check& c) {
  return {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.rhs - c.lhs}, {"passed", c.passed}, {"note", c.note}};
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

double normal_pdf(double x, double var) { return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var); }

Check hermite_orthonormality() {
  const Basis b = Basis::hermite(1, 6);
  Check c{"hermite_orthonormality", 0.0, 1e-8, true, "quadrature Gram vs identity, k,l <= 6, t = 1"};
  for (int k = 0; k <= 6; ++k)
    for (int l = 0; l <= 6; ++l) {
      const double g = integrate(
          [&](double x) {
            const double xs[1] = {x};
            return b.value(1, k, xs) * b.value(1, l, xs) * normal_pdf(x, 1.0);
          },
          -14.0, 14.0);
      c.lhs = std::max(c.lhs, std::abs(g - (k == l ? 1.0 : 0.0)));
    }
  c.passed = c.lhs <= c.rhs;
  return c;
}

std::vector<Check> hermite_tails() {
  std::vector<Check> out;
  for (double lambda : {2.0, 4.0, 6.0}) {
    Check exact{"hermite_tail_exact_form lambda=" + fmt(lambda), 0.0, 1.0, true, "max ratio integral / bound"};
    Check simple{"hermite_tail_simplified lambda=" + fmt(lambda), 0.0, 1.0, true, "max ratio integral / bound"};
    for (int k = 0; k <= 6; ++k)
      for (int l = 0; l <= k; ++l) {
        const double v = std::abs(boost::math::quadrature::exp_sinh<double>().integrate(
            [&](double u) {
              const double x = lambda + u;
              const double v = hermite(k, x) * hermite(l, x) * std::exp(-x * x);
              return std::isfinite(v) ? v : 0.0;
            },
            0.0, std::numeric_limits<double>::infinity()));
        const auto b = hermite_tail_bound(k, l, lambda);
        exact.lhs = std::max(exact.lhs, v / b.exact_form);
        simple.lhs = std::max(simple.lhs, v / b.simplified);
      }
    // k = l = 0 attains the exact form.
    exact.passed = exact.lhs <= 1.0 + 1e-12;
    simple.passed = simple.lhs <= 1.0 + 1e-12;
    out.push_back(exact);
    out.push_back(simple);
  }
  return out;
}

std::vector<Check> gbm_closed_form() {
  std::vector<Check> out;
  for (double t : {0.5, 1.0}) {
    Check c{"gbm_gram_closed_form t=" + fmt(t), 0.0, 1e-6, true, "max relative error, q <= 3"};
    for (int k = 0; k <= 3; ++k)
      for (int l = 0; l <= 3; ++l) {
        // X = exp(W - t/2), W ~ N(0, t); substitute x = e^w.
        const double g = integrate(
            [&](double w) {
              const double x = std::exp(w - 0.5 * t);
              const double ek = std::pow(x, k) * std::exp(-0.5 * k * (k - 1) * t);
              const double el = std::pow(x, l) * std::exp(-0.5 * l * (l - 1) * t);
              return ek * el * normal_pdf(w, t);
            },
            -40.0 * std::sqrt(t), 40.0 * std::sqrt(t) + 8.0 * t);
        const double exact = std::exp(k * l * t);
        c.lhs = std::max(c.lhs, std::abs(g - exact) / std::max(1.0, exact));
      }
    c.passed = c.lhs <= c.rhs;
    out.push_back(c);
  }
  return out;
}

std::vector<Check> vandermonde_checks() {
  std::vector<Check> out;
  for (double t : {0.5, 1.0})
    for (int d = 1; d <= 2; ++d)
      for (int q = 1; q <= 4; ++q) {
        const Basis b = Basis::gbm(d, q);
        const double s = sigma_min(*closed_form_gram(b, t));
        const auto bound = vandermonde_sigma_min_bound(q, d, t);
        const std::string tag = " q=" + std::to_string(q) + " d=" + std::to_string(d) + " t=" + fmt(t);
        Check sharp{"vandermonde_sharp" + tag, 1.0 / bound.sharp, s, s >= 1.0 / bound.sharp, "sigma_min >= 1/bound"};
        Check simple{"vandermonde_simplified" + tag, 1.0 / bound.simplified, s, s >= 1.0 / bound.simplified,
                     bound.ordered ? "" : "sharp form exceeds simplified form"};
        out.push_back(sharp);
        out.push_back(simple);
      }
  return out;
}

std::vector<Check> gbm_tail_checks() {
  std::vector<Check> out;
  for (double t : {0.5, 1.0})
    for (int k = 0; k <= 4; ++k)
      for (double stretch : {1.0, std::numbers::e, std::numbers::e * std::numbers::e}) {
        const double lambda = std::exp(t * (k - 0.5)) * stretch;
        if (!gbm_tail_bound_applies(k, lambda, t)) continue;
        // E[X^k 1{X > lambda}] with ln X ~ N(-t/2, t).
        const double v = boost::math::quadrature::exp_sinh<double>().integrate(
            [&](double u) {
              const double w = std::log(lambda) + u;
              const double v = std::exp(k * w) * normal_pdf(w + 0.5 * t, t);
              return std::isfinite(v) ? v : 0.0;
            },
            0.0, std::numeric_limits<double>::infinity());
        const double b = gbm_tail_bound(k, lambda, t);
        out.push_back({"lognormal_tail k=" + std::to_string(k) + " t=" + fmt(t) + " lambda=" + fmt(lambda), v, b,
                       v <= b * (1.0 + 1e-12), ""});
      }
  return out;
}

std::vector<Check> hermite_truncation_checks(const Instance& in) {
  std::vector<Check> out;
  const Basis& b = in.basis;
  if (b.kind() != BasisKind::kHermiteTruncated || std::isinf(b.lambda()) || b.dimension() != 1) return out;
  const int m = b.size();
  for (int t = 1; t < in.chain.horizon(); ++t) {
    Eigen::MatrixXd a(m, m);
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l)
        a(k, l) = integrate(
            [&](double x) {
              const double xs[1] = {x};
              return b.value(t, k, xs) * b.value(t, l, xs) * normal_pdf(x, t);
            },
            -b.lambda(), b.lambda());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
    const double lhs = sigma_max(a - id);
    const double rhs = hermite_truncation_gram_bound(b, t);
    const double grid = sigma_max(gram_matrix(b, in.chain, t).matrix - id);
    out.push_back({"hermite_truncated_gram t=" + std::to_string(t), lhs, rhs, lhs <= rhs,
                   "grid Gram deviation " + fmt(grid)});
  }
  return out;
}

double normal_draw(Rng& rng) {
  const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Check sensitivity_check(int samples, std::uint64_t seed) {
  Check c{"sensitivity", 0.0, 1.0, true, "max ratio ||x - x~|| / bound over random triples"};
  int ok = 0;
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed, 1000 + static_cast<std::uint64_t>(s));
    const int m = 1 + static_cast<int>(rng.next() % 6);
    Eigen::MatrixXd a(m, m), e(m, m);
    Eigen::VectorXd b(m), db(m);
    for (int i = 0; i < m; ++i) {
      b[i] = normal_draw(rng);
      db[i] = normal_draw(rng);
      for (int j = 0; j < m; ++j) {
        a(i, j) = normal_draw(rng);
        e(i, j) = normal_draw(rng);
      }
    }
    const double smin = sigma_min(a);
    if (!(smin > 1e-6) || b.norm() == 0.0) {
      ++ok;
      continue;
    }
    e *= rng.uniform() * 0.5 * smin / sigma_max(e);
    db *= rng.uniform() * b.norm() / db.norm();
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd xt = (a + e).colPivHouseholderQr().solve(b + db);
    const double bound = sensitivity_bound(smin, sigma_max(e), b.norm(), db.norm());
    const double ratio = (x - xt).norm() / bound;
    c.lhs = std::max(c.lhs, ratio);
    if (ratio <= 1.0 + 1e-9) ++ok;
  }
  c.passed = ok == samples;
  c.note = std::to_string(ok) + "/" + std::to_string(samples) + " triples within bound";
  return c;
}

std::vector<Check> lemma_checks(const Instance& in, int instances, std::uint64_t seed) {
  const int horizon = in.chain.horizon();
  const int m = in.basis.size();
  const SnellTable tab = snell_envelope(in.chain, in.payoff);
  Check first{"lemma_continuation_error", 0.0, 0.0, true, "max over instances of lhs - rhs"};
  Check second{"lemma_stopping_error", 0.0, 0.0, true, "max over instances of lhs - rhs"};
  double worst1 = -std::numeric_limits<double>::infinity(), worst2 = worst1;
  for (int s = 0; s < instances; ++s) {
    Rng rng(seed, 5000 + static_cast<std::uint64_t>(s));
    std::vector<Eigen::VectorXd> alpha;
    for (int t = 1; t < horizon; ++t) {
      Eigen::VectorXd a(m);
      for (int k = 0; k < m; ++k) a[k] = in.payoff.bound() * normal_draw(rng) / std::max(1, m);
      alpha.push_back(a);
    }
    const double z_tilde = in.payoff.bound() * rng.uniform();
    const auto rule = coefficient_rule(in.basis, in.chain, alpha);
    const auto g = conditional_payoff(in.chain, in.payoff, rule);
    auto cont = [&](int t) { return t == 0 ? std::vector<double>{tab.continuation0} : tab.continuation[static_cast<std::size_t>(t - 1)]; };
    auto approx = [&](int t) { return t == 0 ? std::vector<double>{z_tilde} : rule.f[static_cast<std::size_t>(t - 1)]; };
    std::vector<double> dk(static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) dk[static_cast<std::size_t>(k)] = l2_distance(in.chain, k, approx(k), g[static_cast<std::size_t>(k)]);
    for (int t = 0; t < horizon; ++t) {
      double tail1 = 0.0, tail2 = 0.0;
      for (int k = t; k < horizon; ++k) tail1 += dk[static_cast<std::size_t>(k)];
      for (int k = t + 1; k < horizon; ++k) tail2 += dk[static_cast<std::size_t>(k)];
      const double lhs1 = l2_distance(in.chain, t, approx(t), cont(t));
      const double lhs2 = l2_distance(in.chain, t, g[static_cast<std::size_t>(t)], cont(t));
      if (lhs1 - 2.0 * tail1 > worst1) {
        worst1 = lhs1 - 2.0 * tail1;
        first.lhs = lhs1;
        first.rhs = 2.0 * tail1;
      }
      if (lhs2 - 2.0 * tail2 > worst2) {
        worst2 = lhs2 - 2.0 * tail2;
        second.lhs = lhs2;
        second.rhs = 2.0 * tail2;
      }
    }
  }
  first.passed = worst1 <= 1e-12;
  second.passed = worst2 <= 1e-12;
  return {first, second};
}

double binomial_noise(double p, int n) { return 3.0 * std::sqrt(std::max(p * (1.0 - p), 0.0) / std::max(1, n)); }

}  // namespace

// ---- public -----------------------------------------------------------------

bool ExperimentConfig::operator==(const ExperimentConfig& o) const { return config_to_json(*this) == config_to_json(o); }

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::vector<std::string> known = {
      "model", "d", "T", "grid", "chain", "payoff", "basis", "algorithm", "epsilon", "delta", "schedule",
      "sigma_min_lower", "oracle_sigma_min", "n_paths", "trials", "seed", "cost_weights", "fixed_point",
      "epsilon_grid", "sensitivity_samples", "lemma_instances", "threads"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("config." + k + ": unknown field");
  ExperimentConfig c;
  const std::string p = "config";
  c.model = field<std::string>(j, "model", c.model, p);
  c.d = field<int>(j, "d", c.d, p);
  c.horizon = field<int>(j, "T", c.horizon, p);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid_size = field<int>(g, "size", c.grid_size, p + ".grid");
    c.radius = field<double>(g, "radius", c.radius, p + ".grid");
  }
  if (j.contains("chain")) c.custom_chain = j.at("chain");
  if (j.contains("payoff")) {
    const auto& g = j.at("payoff");
    c.payoff = field<std::string>(g, "type", c.payoff, p + ".payoff");
    c.strike = field<double>(g, "strike", c.strike, p + ".payoff");
    c.beta = opt_field<double>(g, "beta", p + ".payoff");
  }
  if (j.contains("basis")) {
    const auto& g = j.at("basis");
    c.basis = field<std::string>(g, "kind", c.basis, p + ".basis");
    c.q = field<int>(g, "q", c.q, p + ".basis");
    c.lambda = opt_field<double>(g, "lambda", p + ".basis");
  }
  c.algorithm = field<std::string>(j, "algorithm", c.algorithm, p);
  c.epsilon = field<double>(j, "epsilon", c.epsilon, p);
  c.delta = field<double>(j, "delta", c.delta, p);
  c.schedule = field<std::string>(j, "schedule", c.schedule, p);
  c.sigma_min_lower = opt_field<double>(j, "sigma_min_lower", p);
  c.oracle_sigma_min = field<bool>(j, "oracle_sigma_min", c.oracle_sigma_min, p);
  c.n_paths = opt_field<int>(j, "n_paths", p);
  c.trials = field<int>(j, "trials", c.trials, p);
  c.seed = field<std::uint64_t>(j, "seed", c.seed, p);
  if (j.contains("cost_weights")) {
    const auto& g = j.at("cost_weights");
    c.weights.samp = field<double>(g, "samp", c.weights.samp, p + ".cost_weights");
    c.weights.z = field<double>(g, "z", c.weights.z, p + ".cost_weights");
    c.weights.e = field<double>(g, "e", c.weights.e, p + ".cost_weights");
  }
  if (j.contains("fixed_point")) {
    const auto& g = j.at("fixed_point");
    c.format.integer_bits = field<int>(g, "integer_bits", c.format.integer_bits, p + ".fixed_point");
    c.format.fraction_bits = field<int>(g, "fraction_bits", c.format.fraction_bits, p + ".fixed_point");
  }
  c.epsilon_grid = field<std::vector<double>>(j, "epsilon_grid", c.epsilon_grid, p);
  c.sensitivity_samples = field<int>(j, "sensitivity_samples", c.sensitivity_samples, p);
  c.lemma_instances = field<int>(j, "lemma_instances", c.lemma_instances, p);
  c.threads = field<unsigned>(j, "threads", c.threads, p);
  validate_config(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  j["d"] = c.d;
  j["T"] = c.horizon;
  j["grid"] = {{"size", c.grid_size}, {"radius", c.radius}};
  if (!c.custom_chain.is_null()) j["chain"] = c.custom_chain;
  j["payoff"] = {{"type", c.payoff}, {"strike", c.strike}};
  if (c.beta) j["payoff"]["beta"] = *c.beta;
  j["basis"] = {{"kind", c.basis}, {"q", c.q}};
  if (c.lambda) j["basis"]["lambda"] = *c.lambda;
  j["algorithm"] = c.algorithm;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["schedule"] = c.schedule;
  if (c.sigma_min_lower) j["sigma_min_lower"] = *c.sigma_min_lower;
  j["oracle_sigma_min"] = c.oracle_sigma_min;
  if (c.n_paths) j["n_paths"] = *c.n_paths;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["cost_weights"] = {{"samp", c.weights.samp}, {"z", c.weights.z}, {"e", c.weights.e}};
  j["fixed_point"] = {{"integer_bits", c.format.integer_bits}, {"fraction_bits", c.format.fraction_bits}};
  j["epsilon_grid"] = c.epsilon_grid;
  j["sensitivity_samples"] = c.sensitivity_samples;
  j["lemma_instances"] = c.lemma_instances;
  j["threads"] = c.threads;
  return j;
}

void validate_config(const ExperimentConfig& c) {
  require(one_of(c.model, {"brownian", "gbm", "custom"}), "model", "must be brownian, gbm or custom");
  require(c.d >= 1 && c.d <= 4, "d", "must be in 1..4");
  if (c.model != "custom") {
    require(c.horizon >= 1 && c.horizon <= 12, "T", "must be in 1..12");
    require(c.grid_size >= 1 && c.grid_size <= 64, "grid.size", "must be in 1..64");
    require(c.radius > 0.0, "grid.radius", "must be positive");
  } else {
    require(c.custom_chain.is_object(), "chain", "required object for model custom");
  }
  require(one_of(c.payoff, {"put", "call", "constant"}), "payoff.type", "must be put, call or constant");
  require(c.payoff == "constant" ? c.strike >= 0.0 : c.strike > 0.0, "payoff.strike", "out of range");
  require(!c.beta || *c.beta > 0.0, "payoff.beta", "must be positive");
  require(one_of(c.basis, {"polynomial", "hermite", "gbm"}), "basis.kind", "must be polynomial, hermite or gbm");
  require(c.q >= 0 && c.q <= 12, "basis.q", "must be in 0..12");
  require(!c.lambda || *c.lambda > 0.0, "basis.lambda", "must be positive");
  require(one_of(c.algorithm, {"classical", "quantum", "both", "oracle"}), "algorithm",
          "must be classical, quantum, both or oracle");
  require(c.epsilon > 0.0, "epsilon", "must be positive");
  require(c.delta > 0.0 && c.delta < 1.0, "delta", "must be in (0,1)");
  require(one_of(c.schedule, {"corollary", "direct"}), "schedule", "must be corollary or direct");
  require(!c.sigma_min_lower || *c.sigma_min_lower > 0.0, "sigma_min_lower", "must be positive");
  const bool needs_sigma = c.algorithm != "oracle" && (c.algorithm != "classical" || c.schedule == "corollary");
  require(!needs_sigma || c.sigma_min_lower || c.oracle_sigma_min, "sigma_min_lower",
          "required unless oracle_sigma_min is set");
  require(!c.n_paths || *c.n_paths >= 1, "n_paths", "must be positive");
  require(c.trials >= 1 && c.trials <= 100000, "trials", "must be in 1..100000");
  require(c.weights.samp >= 0.0 && c.weights.z >= 0.0 && c.weights.e >= 0.0, "cost_weights", "must be nonnegative");
  require(c.format.integer_bits >= 1 && c.format.fraction_bits >= 1 &&
              c.format.integer_bits + c.format.fraction_bits <= 62,
          "fixed_point", "needs c1, c2 >= 1 and c1 + c2 <= 62");
  for (double e : c.epsilon_grid) require(e > 0.0, "epsilon_grid", "entries must be positive");
  require(c.sensitivity_samples >= 1, "sensitivity_samples", "must be positive");
  require(c.lemma_instances >= 1, "lemma_instances", "must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

Instance build_instance(const ExperimentConfig& c) {
  validate_config(c);
  MarkovChain chain = c.model == "brownian" ? discretize_brownian(c.d, c.horizon, c.grid_size, c.radius)
                      : c.model == "gbm"    ? discretize_gbm(c.d, c.horizon, c.grid_size, c.radius)
                                            : chain_from_json(c.custom_chain);
  Payoff payoff = c.payoff == "put"    ? put_payoff(chain, c.strike)
                  : c.payoff == "call" ? call_payoff(chain, c.strike)
                                       : Payoff::from_function(chain, [v = c.strike](int, std::span<const double>) { return v; },
                                                               std::nullopt, "constant");
  if (c.beta) payoff = payoff.truncated(*c.beta);
  const double lambda = c.lambda.value_or(std::numeric_limits<double>::infinity());
  Basis basis = c.basis == "polynomial" ? Basis::polynomial(chain.dimension(), c.q)
                : c.basis == "hermite"  ? Basis::hermite(chain.dimension(), c.q, lambda)
                                        : Basis::gbm(chain.dimension(), c.q, lambda);
  return Instance{std::move(chain), std::move(payoff), std::move(basis)};
}

ExperimentReport cmd_price(const ExperimentConfig& c) {
  const Instance in = build_instance(c);
  ExperimentReport rep;
  rep.command = "price";
  json& j = rep.json;
  j["config"] = config_to_json(c);
  const int horizon = in.chain.horizon();

  std::optional<SnellTable> tab;
  if (in.chain.path_space_size() <= static_cast<double>(kDefaultEnumerationCap)) tab = snell_envelope(in.chain, in.payoff);
  if (tab) {
    j["oracle"] = {{"u0", tab->u0}, {"z0", tab->z0}, {"continuation0", tab->continuation0}};
    j["approximation_error"] = max_approximation_error(in.chain, in.payoff, in.basis);
  }
  std::ostringstream csv;
  csv << "trial,algorithm,estimate,abs_error,tilde_gap,cost\n";
  if (c.algorithm == "oracle") {
    if (!tab) throw CapExceeded(static_cast<std::size_t>(in.chain.path_space_size()), kDefaultEnumerationCap);
    rep.csv = csv.str();
    return rep;
  }

  const Constants k = constants(c, in, c.epsilon);
  j["constants"] = {{"m", k.m},       {"R", k.r},       {"L", k.l2},
                    {"sigma_min", k.sigma_min}, {"sigma_min_from_oracle", k.sigma_from_oracle},
                    {"eps0", k.eps0}, {"eps_effective", k.eps_effective}};
  const double approx = tab ? j["approximation_error"].get<double>() : 0.0;
  const double bound = five_pow(horizon) * (k.eps_effective + approx);
  j["bound"] = bound;

  const bool run_classical = c.algorithm == "classical" || c.algorithm == "both";
  const bool run_quantum = c.algorithm == "quantum" || c.algorithm == "both";
  const auto trials = static_cast<std::size_t>(c.trials);
  const unsigned inner = trials > 1 ? 1u : c.threads;

  struct TrialRow {
    double estimate = 0.0, tilde_gap = 0.0, cost = 0.0;
  };
  auto summarize = [&](const char* name, const std::vector<TrialRow>& rows, json extra) {
    json a = std::move(extra);
    std::vector<double> est, err;
    int fails = 0;
    for (const auto& r : rows) {
      est.push_back(r.estimate);
      if (tab) {
        err.push_back(std::abs(r.estimate - tab->u0));
        if (err.back() > bound) ++fails;
      }
    }
    a["estimates"] = est;
    if (tab) {
      a["abs_errors"] = err;
      a["failures"] = fails;
      a["failure_rate"] = static_cast<double>(fails) / static_cast<double>(rows.size());
      a["failure_rate_within_delta"] = a["failure_rate"].get<double>() <= c.delta;
      if (!a["failure_rate_within_delta"].get<bool>()) rep.all_passed = false;
    }
    std::vector<double> gaps, costs;
    for (const auto& r : rows) {
      gaps.push_back(r.tilde_gap);
      costs.push_back(r.cost);
    }
    a["tilde_gaps"] = gaps;
    a["costs"] = costs;
    for (std::size_t i = 0; i < rows.size(); ++i)
      csv << i << ',' << name << ',' << fmt(rows[i].estimate) << ',' << (tab ? fmt(err[i]) : "") << ','
          << fmt(rows[i].tilde_gap) << ',' << fmt(rows[i].cost) << '\n';
    j[name] = a;
  };

  if (run_classical) {
    const std::int64_t n = c.n_paths ? *c.n_paths : choose_N(k.m, k.eps0, c.delta);
    if (n > 50'000'000) throw ConfigError("config.epsilon: classical schedule needs N = " + std::to_string(n) + " paths");
    std::vector<TrialRow> rows(trials);
    parallel_for(trials, [&](std::size_t i) {
      const auto run = run_classical_lsm(in.chain, in.payoff, in.basis, static_cast<int>(n), derive_seed(c.seed, 100, i));
      rows[i].estimate = run.estimate;
      rows[i].cost = classical_cost(c, k.m, n);
      if (tab) rows[i].tilde_gap = std::abs(run.continuation - tilde_target(in, run.alpha));
    }, c.threads);
    summarize("classical", rows, {{"N", n}});
  }
  if (run_quantum) {
    std::vector<TrialRow> rows(trials);
    std::vector<json> ledgers(trials);
    parallel_for(trials, [&](std::size_t i) {
      const auto run = run_quantum_lsm(in.chain, in.payoff, in.basis, k.eps0, c.delta,
                                       quantum_options(c, k, derive_seed(c.seed, 200, i), inner));
      rows[i].estimate = run.estimate;
      rows[i].cost = run.cost;
      rows[i].tilde_gap = std::abs(run.final_estimate - tilde_target(in, run.alpha));
      ledgers[i] = run.ledger.to_json();
    }, c.threads);
    summarize("quantum", rows, {{"ledgers", ledgers}});
  }
  rep.csv = csv.str();
  return rep;
}

ExperimentReport cmd_scaling(const ExperimentConfig& c) {
  const Instance in = build_instance(c);
  ExperimentReport rep;
  rep.command = "scaling";
  json& j = rep.json;
  j["config"] = config_to_json(c);
  std::vector<double> grid = c.epsilon_grid;
  if (grid.empty()) grid = {0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  if (grid.size() < 4) throw ConfigError("config.epsilon_grid: needs at least 4 points");
  std::vector<double> inv, n_classical, q_cost, ratio;
  std::ostringstream csv;
  csv << "epsilon,eps0,classical_N,classical_cost,quantum_cost,quantum_grover,cost_ratio\n";
  json rows = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Constants k = constants(c, in, grid[i]);
    if (in.chain.horizon() > 1 && k.eps0 > k.sigma_min / 2.0)
      throw ConfigError("config.epsilon_grid: eps0 = " + fmt(k.eps0) + " exceeds sigma_min/2");
    const std::int64_t n = choose_N(k.m, k.eps0, c.delta);
    const auto run = run_quantum_lsm(in.chain, in.payoff, in.basis, k.eps0, c.delta,
                                     quantum_options(c, k, derive_seed(c.seed, 300, i), c.threads));
    const double cc = classical_cost(c, k.m, n);
    inv.push_back(1.0 / grid[i]);
    n_classical.push_back(static_cast<double>(n));
    q_cost.push_back(run.cost);
    ratio.push_back(cc / run.cost);
    rows.push_back({{"epsilon", grid[i]},
                    {"eps0", k.eps0},
                    {"classical_N", n},
                    {"classical_cost", cc},
                    {"quantum_cost", run.cost},
                    {"quantum_ledger", run.ledger.to_json()}});
    csv << fmt(grid[i]) << ',' << fmt(k.eps0) << ',' << n << ',' << fmt(cc) << ',' << fmt(run.cost) << ','
        << run.ledger.grover() << ',' << fmt(ratio.back()) << '\n';
  }
  const SlopeFit fq = fit_log_log(inv, q_cost);
  const SlopeFit fc = fit_log_log(inv, n_classical);
  // Monotonicity on the fitted curves: the ratio grows iff the slope gap is positive.
  bool monotone = fc.slope > fq.slope;
  const bool q_ok = std::abs(fq.slope - 1.0) <= 0.15;
  const bool c_ok = std::abs(fc.slope - 2.0) <= 0.2;
  j["points"] = rows;
  j["quantum_fit"] = {{"slope", fq.slope}, {"intercept", fq.intercept}, {"ci95", fq.half_width}, {"passed", q_ok}};
  j["classical_fit"] = {{"slope", fc.slope}, {"intercept", fc.intercept}, {"ci95", fc.half_width}, {"passed", c_ok}};
  j["ratio_monotone"] = monotone;
  rep.all_passed = q_ok && c_ok && monotone;
  rep.csv = csv.str();
  return rep;
}

ExperimentReport cmd_validate_bounds(const ExperimentConfig& c) {
  const Instance in = build_instance(c);
  ExperimentReport rep;
  rep.command = "validate-bounds";
  std::vector<Check> checks;
  checks.push_back(hermite_orthonormality());
  for (auto& x : hermite_tails()) checks.push_back(x);
  for (auto& x : hermite_truncation_checks(in)) checks.push_back(x);
  for (auto& x : gbm_closed_form()) checks.push_back(x);
  for (auto& x : vandermonde_checks()) checks.push_back(x);
  for (auto& x : gbm_tail_checks()) checks.push_back(x);
  checks.push_back(sensitivity_check(c.sensitivity_samples, c.seed));
  if (in.chain.horizon() > 1)
    for (auto& x : lemma_checks(in, c.lemma_instances, c.seed)) checks.push_back(x);

  // Theorem right-hand sides on seeded trials.
  if (c.algorithm != "oracle" && in.chain.horizon() > 1) {
    const SnellTable tab = snell_envelope(in.chain, in.payoff);
    const Constants k = constants(c, in, c.epsilon);
    const double approx = max_approximation_error(in.chain, in.payoff, in.basis);
    const int horizon = in.chain.horizon();
    const double spread = k.m * k.r * k.l2 * k.l2 / (k.sigma_min * k.sigma_min);
    const auto trials = static_cast<std::size_t>(c.trials);
    if (c.algorithm == "classical" || c.algorithm == "both") {
      const std::int64_t n = c.n_paths ? *c.n_paths : choose_N(k.m, k.eps0, c.delta);
      const double rhs = five_pow(horizon) * (4.0 * k.eps0 * spread + approx);
      std::vector<char> fail(trials);
      parallel_for(trials, [&](std::size_t i) {
        const auto run = run_classical_lsm(in.chain, in.payoff, in.basis, static_cast<int>(n), derive_seed(c.seed, 400, i));
        fail[i] = std::abs(run.estimate - tab.u0) >= rhs;
      }, c.threads);
      const double rate = static_cast<double>(std::count(fail.begin(), fail.end(), 1)) / static_cast<double>(trials);
      const double p = std::min(1.0, 6.0 * k.m * k.m * std::exp(-2.0 * n * k.eps0 * k.eps0 / (k.m * k.m)));
      checks.push_back({"classical_error_theorem", rate, p + binomial_noise(p, c.trials), rate <= p + binomial_noise(p, c.trials),
                        "failure rate vs 6 m^2 exp(-2 N eps^2 / m^2)"});
    }
    if (c.algorithm == "quantum" || c.algorithm == "both") {
      std::vector<char> fail(trials);
      parallel_for(trials, [&](std::size_t i) {
        const auto run = run_quantum_lsm(in.chain, in.payoff, in.basis, k.eps0, c.delta,
                                         quantum_options(c, k, derive_seed(c.seed, 500, i), 1));
        const double rhs = 8.0 * horizon * k.eps0 * spread + 2.0 * tilde_approx_sum(in, run.alpha);
        fail[i] = std::abs(run.estimate - tab.u0) >= rhs;
      }, c.threads);
      const double rate = static_cast<double>(std::count(fail.begin(), fail.end(), 1)) / static_cast<double>(trials);
      const double lim = c.delta + binomial_noise(c.delta, c.trials);
      checks.push_back({"quantum_error_theorem", rate, lim, rate <= lim, "failure rate vs delta"});
    }
  }

  json arr = json::array();
  std::ostringstream csv;
  csv << "name,lhs,rhs,margin,passed\n";
  for (const auto& ch : checks) {
    arr.push_back(check_json(ch));
    csv << '"' << ch.name << "\"," << fmt(ch.lhs) << ',' << fmt(ch.rhs) << ',' << fmt(ch.rhs - ch.lhs) << ','
        << (ch.passed ? "pass" : "fail") << '\n';
    if (!ch.passed) rep.all_passed = false;
  }
  rep.json["config"] = config_to_json(c);
  rep.json["checks"] = arr;
  rep.json["all_passed"] = rep.all_passed;
  rep.csv = csv.str();
  return rep;
}

ExperimentReport cmd_dump_oracle(const ExperimentConfig& c) {
  const Instance in = build_instance(c);
  const SnellTable tab = snell_envelope(in.chain, in.payoff);
  ExperimentReport rep;
  rep.command = "dump-oracle";
  json& j = rep.json;
  j["config"] = config_to_json(c);
  j["u0"] = tab.u0;
  j["z0"] = tab.z0;
  j["continuation0"] = tab.continuation0;
  j["chain"] = chain_to_json(in.chain);
  std::ostringstream csv;
  csv << "t,state,x,payoff,value,continuation,stop\n";
  json steps = json::array();
  for (int t = 1; t <= tab.horizon; ++t) {
    const auto ut = static_cast<std::size_t>(t - 1);
    json s = {{"t", t}, {"value", tab.value[ut]}, {"stop", json::array()}};
    if (t < tab.horizon) s["continuation"] = tab.continuation[ut];
    for (std::size_t i = 0; i < in.chain.grid_size(t); ++i) {
      s["stop"].push_back(tab.stop[ut][i] != 0);
      std::string x;
      for (double v : in.chain.grid(t).point(i)) x += (x.empty() ? "" : " ") + fmt(v);
      csv << t << ',' << i << ",\"" << x << "\"," << fmt(in.payoff.value(t, static_cast<int>(i))) << ','
          << fmt(tab.value[ut][i]) << ',' << (t < tab.horizon ? fmt(tab.continuation[ut][i]) : "") << ','
          << (tab.stop[ut][i] ? 1 : 0) << '\n';
    }
    steps.push_back(s);
  }
  j["steps"] = steps;
  rep.csv = csv.str();
  return rep;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  const auto base = out_dir / report.command;
  std::ofstream js(base.string() + ".json");
  js << report.json.dump(2) << '\n';
  std::ofstream cs(base.string() + ".csv");
  cs << report.csv;
  if (!js || !cs) throw Error(ErrorCode::kIo, "failed writing report to " + out_dir.string());
}

SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw InvalidArgument("slope fit needs at least 3 matched points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2.0) / sxx);
  const boost::math::students_t dist(n - 2.0);
  f.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return f;
}

double sensitivity_bound(double sigma_min_a, double eps_a, double norm_b, double eps_b) {
  return 2.0 / sigma_min_a * (eps_a * norm_b / sigma_min_a + eps_b);
}

}  // namespace qlsm
