// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"
#include "qlsm/amplitude_estimation.hpp"
#include "qlsm/dp.hpp"
#include "qlsm/harness.hpp"
#include "qlsm/lsm_classical.hpp"
#include "qlsm/numeric.hpp"
#include "qlsm/qmontecarlo.hpp"
#include "qlsm/stopping_circuits.hpp"

namespace qlsm {
namespace {

using testing::integrate;
using testing::integrate_tail;
using testing::normal_pdf;

struct Outcome {
  bool passed = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// 1. DP oracle vs brute force over adapted rules.
Outcome oracle_correctness() {
  std::mt19937_64 gen(2026);
  std::uniform_int_distribution<int> horizon(1, 4);
  double worst = 0.0;
  int markov_checked = 0, history_checked = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 50; ++i) {
    const auto inst = testing::random_instance(gen, horizon(gen), 5);
    const double u0 = snell_envelope(inst.chain, inst.payoff).u0;
    worst = std::max(worst, std::abs(u0 - testing::history_tree_value(inst.chain, inst.payoff)));
    const double markov = testing::markov_rule_enumeration(inst.chain, inst.payoff, 14);
    if (!std::isnan(markov)) {
      worst = std::max(worst, std::abs(u0 - markov));
      ++markov_checked;
    }
    const double hist = testing::history_rule_enumeration(inst.chain, inst.payoff, 12);
    if (!std::isnan(hist)) {
      worst = std::max(worst, std::abs(u0 - hist));
      ++history_checked;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0, "max |diff| " + num(worst) + ", rule enumeration on " + std::to_string(markov_checked) +
                                             "+" + std::to_string(history_checked) + " instances, " + num(secs) + " s"};
}

// 2. apply_C annotations vs the per-path recursion under shared rounding.
Outcome circuit_equivalence() {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> horizon(2, 4);
  std::normal_distribution<double> coef(0.0, 1.0);
  const FixedPointFormat fmt{6, 20};
  long mismatches = 0, dirty = 0, checked = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 20; ++i) {
    const int T = horizon(gen);
    const auto inst = testing::random_instance(gen, T, 5);
    const Basis basis = Basis::polynomial(1, 1 + i % 2);
    const int m = basis.size();
    StoppingCircuit circuit(inst.chain, inst.payoff, basis, fmt);
    std::vector<Eigen::VectorXd> alpha;
    for (int t = 1; t < T; ++t) {
      Eigen::VectorXd a(m);
      for (int k = 0; k < m; ++k) a[k] = coef(gen);
      alpha.push_back(a);
      circuit.set_alpha(t, a);
    }
    const BasisTable table(basis, inst.chain);
    const SamplingOracle oracle(inst.chain);
    std::vector<std::vector<int>> taus;
    for (const auto& p : *oracle.paths())
      taus.push_back(testing::rounded_stopping_times(inst.payoff, table, p, alpha, fmt));
    for (int t = 1; t <= T; ++t)
      for (int k = 0; k < m; ++k) {
        QueryLedger ledger;
        HybridState s = oracle.prepare(ledger);
        circuit.apply_C(t, k, s, "out", ledger);
        for (const auto& name : s.nonzero_registers())
          if (name != "out") ++dirty;
        const auto& out = s.reg("out");
        for (std::size_t n = 0; n < s.size(); ++n) {
          const auto& st = s.path(n).states;
          const int tau = taus[n][static_cast<std::size_t>(t)];
          const auto z = FixedPoint::encode(inst.payoff.value(tau, st[static_cast<std::size_t>(tau - 1)]), fmt);
          const double ev = t == 1 ? 1.0 : table.row(t - 1, st[static_cast<std::size_t>(t - 2)])[static_cast<std::size_t>(k)];
          const auto expected = fixed_mul(z, FixedPoint::encode(ev, fmt));
          if (out[n] != expected.raw()) ++mismatches;
          ++checked;
        }
        circuit.apply_C(t, k, s, "out", ledger);
        s.release_zero_registers();
        if (!s.nonzero_registers().empty()) ++dirty;
      }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && dirty == 0 && secs < 30.0,
          std::to_string(checked) + " annotations, " + std::to_string(mismatches) + " mismatches, " + std::to_string(dirty) +
              " dirty registers, " + num(secs) + " s"};
}

// 3. Analytic amplitude estimation vs the statevector cross-check.
Outcome ae_fidelity() {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  bool exact_edges = true;
  for (double a : {0.0, 0.1, 0.25, 0.5, 1.0})
    for (int m : {4, 8, 16}) {
      std::vector<double> prob(6), ratio(6);
      double s = 0.0;
      for (auto& p : prob) s += (p = unit(gen) + 0.1);
      for (auto& p : prob) p /= s;
      double mu = 0.0;
      for (std::size_t i = 0; i < ratio.size(); ++i) mu += prob[i] * (ratio[i] = unit(gen));
      for (auto& r : ratio) r = a <= mu ? r * a / mu : 1.0 - (1.0 - r) * (1.0 - a) / (1.0 - mu);
      const auto x = ae_distribution(a, m);
      const auto y = ae_distribution_statevector(prob, ratio, m);
      for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
      if (a == 0.0 || a == 1.0) {
        Rng rng(derive_seed(5, static_cast<std::uint64_t>(m)));
        for (int r = 0; r < 100; ++r) exact_edges = exact_edges && ae_sample(a, m, rng).estimate == a;
      }
    }
  return {worst <= 1e-9 && exact_edges, "max |diff| " + num(worst) + (exact_edges ? ", edges exact" : ", edges inexact")};
}

// 4. qmontecarlo failure rates on exactly enumerable means.
Outcome mean_estimation() {
  struct Variable {
    const char* name;
    std::vector<double> prob, values;
  };
  const std::vector<Variable> vars = {
      {"indicator", {0.25, 0.25, 0.25, 0.25}, {1.0, 0.0, 0.0, 0.0}},
      {"signed", {0.1, 0.3, 0.2, 0.25, 0.15}, {-1.0, -0.375, 0.25, 0.625, 1.0}},
  };
  const int trials = 500;
  bool ok = true;
  std::string detail;
  for (const auto& v : vars) {
    std::vector<Path> paths;
    double mu = 0.0, second = 0.0;
    for (std::size_t i = 0; i < v.prob.size(); ++i) {
      paths.push_back({{static_cast<int>(i)}, v.prob[i]});
      mu += v.prob[i] * v.values[i];
      second += v.prob[i] * v.values[i] * v.values[i];
    }
    const double sigma = std::sqrt(second - mu * mu);
    const SamplingOracle oracle(paths, 1);
    const FunctionOracle h(v.name, v.values);
    for (auto [eps, delta] : {std::pair{0.05, 0.1}, std::pair{0.02, 0.05}}) {
      std::vector<char> fail(trials);
      parallel_for(trials, [&](std::size_t i) {
        Rng rng(derive_seed(404, static_cast<std::uint64_t>(eps * 1000), i));
        const auto r = qmontecarlo(oracle, h, eps, delta, sigma, rng, {.range_bound = 1.0});
        fail[i] = std::abs(r.estimate - mu) > eps;
      });
      const double rate = static_cast<double>(std::count(fail.begin(), fail.end(), 1)) / trials;
      const double limit = delta + 3.0 * std::sqrt(delta * (1.0 - delta) / trials);
      ok = ok && rate <= limit;
      detail += std::string(v.name) + "(" + num(eps) + "," + num(delta) + ") " + num(rate) + "<=" + num(limit) + " ";
    }
  }
  return {ok, detail};
}

ExperimentConfig reference_config() {
  return parse_config(R"({
    "model": "brownian", "d": 1, "T": 3, "grid": {"size": 4, "radius": 2.0},
    "payoff": {"type": "put", "strike": 1.0}, "basis": {"kind": "polynomial", "q": 0},
    "algorithm": "both", "schedule": "corollary", "oracle_sigma_min": true,
    "delta": 0.1, "seed": 11
  })");
}

// 5. Query-cost exponents on the reference instance.
Outcome speedup_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = cmd_scaling(reference_config());
  const double secs = seconds_since(t0);
  const auto& j = rep.json;
  return {rep.all_passed && secs < 600.0,
          "quantum slope " + num(j["quantum_fit"]["slope"].get<double>()) + ", classical slope " +
              num(j["classical_fit"]["slope"].get<double>()) + ", ratio monotone " +
              (j["ratio_monotone"].get<bool>() ? "yes" : "no") + ", " + num(secs) + " s"};
}

// 6. End-to-end failure rate on a Bermudan put.
Outcome end_to_end() {
  const auto c = parse_config(R"({
    "model": "brownian", "d": 1, "T": 3, "grid": {"size": 8, "radius": 3.0},
    "payoff": {"type": "put", "strike": 1.0}, "basis": {"kind": "hermite", "q": 2},
    "algorithm": "both", "schedule": "corollary", "oracle_sigma_min": true,
    "epsilon": 2.0, "delta": 0.1, "trials": 100, "seed": 6
  })");
  const auto rep = cmd_price(c);
  const auto& j = rep.json;
  bool ok = true;
  std::string detail = "bound " + num(j["bound"].get<double>()) + ";";
  for (const char* alg : {"classical", "quantum"}) {
    const double rate = j[alg]["failure_rate"].get<double>();
    double worst = 0.0;
    for (double e : j[alg]["abs_errors"]) worst = std::max(worst, e);
    ok = ok && rate <= c.delta;
    detail += std::string(" ") + alg + " rate " + num(rate) + " max err " + num(worst);
  }
  detail += "; N " + std::to_string(j["classical"]["N"].get<long>());
  return {ok, detail};
}

// 7. Hermite normalization and tail bounds.
Outcome hermite_suite() {
  double orth = 0.0;
  const Basis b = Basis::hermite(1, 6);
  for (int k = 0; k <= 6; ++k)
    for (int l = 0; l <= 6; ++l) {
      // Physicists' weight e^{-x^2} with the k! 2^k sqrt(pi) normalization.
      const double raw = integrate([&](double x) { return testing::hermite_explicit(k, x) * testing::hermite_explicit(l, x) * std::exp(-x * x); },
                                   -12.0, 12.0);
      const double scaled = raw / std::sqrt(std::tgamma(k + 1.0) * std::pow(2.0, k) * std::tgamma(l + 1.0) * std::pow(2.0, l) * std::numbers::pi);
      orth = std::max(orth, std::abs(scaled - (k == l ? 1.0 : 0.0)));
      // Library basis under the N(0, 1) image measure.
      const double lib = integrate([&](double x) {
        const double xs[1] = {x};
        return b.value(1, k, xs) * b.value(1, l, xs) * normal_pdf(x, 1.0);
      }, -14.0, 14.0);
      orth = std::max(orth, std::abs(lib - (k == l ? 1.0 : 0.0)));
    }
  double ratio_exact = 0.0, ratio_simple = 0.0;
  for (double lambda : {2.0, 4.0, 6.0})
    for (int k = 0; k <= 6; ++k)
      for (int l = 0; l <= k; ++l) {
        const double v = std::abs(integrate_tail(
            [&](double x) { return testing::hermite_explicit(k, x) * testing::hermite_explicit(l, x) * std::exp(-x * x); }, lambda));
        const auto bound = hermite_tail_bound(k, l, lambda);
        ratio_exact = std::max(ratio_exact, v / bound.exact_form);
        ratio_simple = std::max(ratio_simple, v / bound.simplified);
      }
  // k = l = 0 attains the exact form.
  return {orth <= 1e-8 && ratio_exact <= 1.0 + 1e-12 && ratio_simple <= 1.0 + 1e-12,
          "orthonormality " + num(orth) + ", tail/bound max " + num(ratio_exact) + " (exact form) " + num(ratio_simple) +
              " (simplified)"};
}

std::vector<std::vector<int>> multi_indices(int q, int d) {
  std::vector<std::vector<int>> out{{}};
  for (int i = 0; i < d; ++i) {
    std::vector<std::vector<int>> next;
    for (const auto& p : out)
      for (int k = 0; k <= q; ++k) {
        auto x = p;
        x.push_back(k);
        next.push_back(x);
      }
    out = next;
  }
  return out;
}

// 8. GBM Gram closed form, Vandermonde sigma_min bounds, log-normal tails.
Outcome gbm_suite() {
  double gram_err = 0.0;
  for (double t : {0.5, 1.0})
    for (int d = 1; d <= 2; ++d) {
      const auto idx = multi_indices(3, d);
      // One-dimensional factor under X = exp(W - t/2), W ~ N(0, t).
      auto factor = [&](int k, int l) {
        return integrate([&](double w) {
          const double x = std::exp(w - 0.5 * t);
          return std::pow(x, k + l) * std::exp(-0.5 * (k * (k - 1) + l * (l - 1)) * t) *
                 normal_pdf(w, t);
        }, -40.0 * std::sqrt(t), 40.0 * std::sqrt(t) + 8.0 * t);
      };
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) {
          double q = 1.0, exact = 1.0;
          for (int i = 0; i < d; ++i) {
            q *= factor(idx[r][static_cast<std::size_t>(i)], idx[c][static_cast<std::size_t>(i)]);
            exact *= std::exp(idx[r][static_cast<std::size_t>(i)] * idx[c][static_cast<std::size_t>(i)] * t);
          }
          gram_err = std::max(gram_err, std::abs(q - exact) / std::max(1.0, exact));
        }
    }
  bool sigma_ok = true;
  for (double t : {0.5, 1.0})
    for (int d = 1; d <= 2; ++d)
      for (int q = 1; q <= 4; ++q) {
        const auto idx = multi_indices(q, d);
        const auto n = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd g(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
          for (Eigen::Index c = 0; c < n; ++c) {
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += idx[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] * idx[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
            g(r, c) = std::exp(dot * t);
          }
        const double s = testing::smallest_singular(g);
        const auto bound = vandermonde_sigma_min_bound(q, d, t);
        sigma_ok = sigma_ok && s >= 1.0 / bound.sharp && s >= 1.0 / bound.simplified;
      }
  double tail_ratio = 0.0;
  int tails = 0;
  for (double t : {0.5, 1.0})
    for (int k = 0; k <= 4; ++k)
      for (double stretch : {1.0, 3.0, 10.0}) {
        const double lambda = std::exp(t * (k - 0.5)) * stretch;
        if (!gbm_tail_bound_applies(k, lambda, t)) continue;
        const double v = integrate_tail([&](double w) { return std::exp(k * w) * normal_pdf(w + 0.5 * t, t); }, std::log(lambda));
        tail_ratio = std::max(tail_ratio, v / gbm_tail_bound(k, lambda, t));
        ++tails;
      }
  // stretch = 1 sits on the Gaussian median, where the bound is attained.
  return {gram_err <= 1e-6 && sigma_ok && tail_ratio <= 1.0 + 1e-12 && tails > 0,
          "gram rel err " + num(gram_err) + ", sigma_min bounds " + (sigma_ok ? "hold" : "violated") + ", tail/bound max " +
              num(tail_ratio) + " over " + std::to_string(tails) + " cases"};
}

// 9. Sensitivity of square systems.
Outcome sensitivity() {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int ok = 0, used = 0;
  double worst = 0.0;
  while (used < 1000) {
    const int m = 1 + static_cast<int>(gen() % 6);
    Eigen::MatrixXd a(m, m), e(m, m);
    Eigen::VectorXd b(m), db(m);
    for (int i = 0; i < m; ++i) {
      b[i] = nd(gen);
      db[i] = nd(gen);
      for (int j = 0; j < m; ++j) {
        a(i, j) = nd(gen);
        e(i, j) = nd(gen);
      }
    }
    const double smin = testing::smallest_singular(a);
    if (smin < 1e-3) continue;
    ++used;
    const double eps_a = unit(gen) * smin / 2.0;
    e *= eps_a / testing::spectral_norm(e);
    const double eps_b = unit(gen) * b.norm();
    db *= eps_b / db.norm();
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    const Eigen::VectorXd xt = (a + e).fullPivLu().solve(b + db);
    const double bound = 2.0 / smin * (eps_a * b.norm() / smin + eps_b);
    const double r = (x - xt).norm() / bound;
    worst = std::max(worst, r);
    if (r <= 1.0 + 1e-9) ++ok;
  }
  return {ok == 1000, std::to_string(ok) + "/1000 within bound, max ratio " + num(worst)};
}

// 10. Continuation-error inequalities with exact norms.
Outcome lemma_check() {
  std::mt19937_64 gen(123);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  std::uniform_int_distribution<int> horizon(2, 4);
  double worst1 = -1e300, worst2 = -1e300;
  for (int i = 0; i < 20; ++i) {
    const int T = horizon(gen);
    const auto inst = testing::random_instance(gen, T, 5);
    const Basis basis = Basis::polynomial(1, i % 3);
    const auto tab = snell_envelope(inst.chain, inst.payoff);
    std::vector<Eigen::VectorXd> alpha;
    for (int t = 1; t < T; ++t) {
      Eigen::VectorXd a(basis.size());
      for (int k = 0; k < basis.size(); ++k) a[k] = nd(gen);
      alpha.push_back(a);
    }
    const double z_tilde = unit(gen);
    const auto rule = coefficient_rule(basis, inst.chain, alpha);
    const auto g = conditional_payoff(inst.chain, inst.payoff, rule);
    auto cont = [&](int t) {
      return t == 0 ? std::vector<double>{tab.continuation0} : tab.continuation[static_cast<std::size_t>(t - 1)];
    };
    auto approx = [&](int t) { return t == 0 ? std::vector<double>{z_tilde} : rule.f[static_cast<std::size_t>(t - 1)]; };
    std::vector<double> dk;
    for (int k = 0; k < T; ++k) dk.push_back(l2_distance(inst.chain, k, approx(k), g[static_cast<std::size_t>(k)]));
    for (int t = 0; t < T; ++t) {
      double tail1 = 0.0, tail2 = 0.0;
      for (int k = t; k < T; ++k) tail1 += dk[static_cast<std::size_t>(k)];
      for (int k = t + 1; k < T; ++k) tail2 += dk[static_cast<std::size_t>(k)];
      worst1 = std::max(worst1, l2_distance(inst.chain, t, approx(t), cont(t)) - 2.0 * tail1);
      worst2 = std::max(worst2, l2_distance(inst.chain, t, g[static_cast<std::size_t>(t)], cont(t)) - 2.0 * tail2);
    }
  }
  return {worst1 <= 1e-12 && worst2 <= 1e-12, "max lhs - rhs: " + num(worst1) + ", " + num(worst2)};
}

}  // namespace
}  // namespace qlsm

int main(int argc, char** argv) {
  using Fn = std::function<qlsm::Outcome()>;
  const std::vector<std::pair<const char*, Fn>> criteria = {
      {"oracle correctness", qlsm::oracle_correctness},
      {"circuit/classical equivalence", qlsm::circuit_equivalence},
      {"amplitude estimation fidelity", qlsm::ae_fidelity},
      {"quantum mean estimation", qlsm::mean_estimation},
      {"speedup scaling", qlsm::speedup_scaling},
      {"end-to-end error bound", qlsm::end_to_end},
      {"hermite suite", qlsm::hermite_suite},
      {"gbm suite", qlsm::gbm_suite},
      {"sensitivity", qlsm::sensitivity},
      {"continuation error lemma", qlsm::lemma_check},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    qlsm::Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %s: %s [%.2f s]\n", o.passed ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(),
                qlsm::seconds_since(t0));
    std::fflush(stdout);
    if (!o.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
