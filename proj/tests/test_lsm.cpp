// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qlsm/dp.hpp"
#include "qlsm/error.hpp"
#include "qlsm/lsm_classical.hpp"
#include "qlsm/lsm_quantum.hpp"
#include "qlsm/stopping_circuits.hpp"

namespace qlsm {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

std::vector<std::uint64_t> annotate(const StoppingCircuit& c, const MarkovChain& chain, int t, int k, QueryLedger& ledger) {
  const SamplingOracle oracle(chain);
  auto s = oracle.prepare(ledger);
  c.apply_C(t, k, s, "out", ledger);
  return s.reg("out");
}

TEST(ClassicalLsm, ChooseN) {
  EXPECT_EQ(choose_N(1, 1.0, 6.0 / std::exp(2.0)), 1);
  EXPECT_EQ(choose_N(2, 0.1, 0.05), 1235);
}

TEST(ClassicalLsm, DeterministicBySeed) {
  const auto chain = discretize_brownian(1, 3, 4, 2.0);
  const auto payoff = put_payoff(chain, 1.0);
  const auto basis = Basis::polynomial(1, 1);
  const auto a = run_classical_lsm(chain, payoff, basis, 500, 12);
  const auto b = run_classical_lsm(chain, payoff, basis, 500, 12);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stopping_times, b.stopping_times);
  EXPECT_EQ(a.path_samples, 500u);
}

TEST(ClassicalLsm, GramUsesTheSamePaths) {
  const auto chain = discretize_brownian(1, 3, 4, 2.0);
  const auto payoff = put_payoff(chain, 1.0);
  const auto basis = Basis::polynomial(1, 1);
  const auto run = run_classical_lsm(chain, payoff, basis, 300, 3);
  const BasisTable table(basis, chain);
  for (int t = 1; t < 3; ++t) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    for (const auto& p : run.paths) {
      const auto r = table.row(t, p.states[static_cast<std::size_t>(t - 1)]);
      const Eigen::Vector2d e(r[0], r[1]);
      a += e * e.transpose();
    }
    a /= 300.0;
    EXPECT_TRUE(a.isApprox(run.gram[static_cast<std::size_t>(t - 1)], 1e-12));
  }
}

TEST(ClassicalLsm, RecomputedStoppingTimesAgree) {
  const auto chain = discretize_brownian(1, 3, 4, 2.0);
  const auto payoff = put_payoff(chain, 1.0);
  const auto basis = Basis::polynomial(1, 1);
  const auto run = run_classical_lsm(chain, payoff, basis, 200, 8);
  EXPECT_EQ(recompute_stopping_times(run, payoff, basis, chain), run.stopping_times);
}

TEST(ClassicalLsm, ConvergesOnFullSpanBasis) {
  // With an interpolating basis the regression is exact up to sampling noise.
  const auto chain = discretize_brownian(1, 3, 3, 2.0);
  const auto payoff = put_payoff(chain, 0.5);
  const auto run = run_classical_lsm(chain, payoff, Basis::polynomial(1, 2), 200000, 1);
  EXPECT_NEAR(run.estimate, snell_envelope(chain, payoff).u0, 0.02);
}

TEST(ClassicalLsm, SharedRoundingMatchesOracle) {
  std::mt19937_64 gen(4);
  const auto inst = testing::random_instance(gen, 4, 4, 2);
  const auto basis = Basis::polynomial(1, 1);
  const FixedPointFormat fmt{4, 12};
  const auto run = run_classical_lsm(inst.chain, inst.payoff, basis, 300, 2, {.shared_rounding = fmt});
  const BasisTable table(basis, inst.chain);
  for (std::size_t n = 0; n < run.paths.size(); ++n) {
    const auto tau = testing::rounded_stopping_times(inst.payoff, table, run.paths[n], run.alpha, fmt);
    for (int t = 1; t <= 4; ++t) EXPECT_EQ(run.stopping_times[n][static_cast<std::size_t>(t - 1)], tau[static_cast<std::size_t>(t)]);
  }
}

TEST(StoppingCircuit, FinalStepWritesHorizon) {
  const auto chain = discretize_brownian(1, 2, 2, 1.0);
  const StoppingCircuit c(chain, put_payoff(chain, 1.0), Basis::polynomial(1, 0));
  QueryLedger ledger;
  auto s = SamplingOracle(chain).prepare(ledger);
  c.apply_W(2, s, ledger);
  for (auto v : s.reg(tau_register(2))) EXPECT_EQ(v, 2u);
  c.apply_W_inverse(2, s, ledger);
  EXPECT_FALSE(s.is_set(tau_register(2)));
}

TEST(StoppingCircuit, TieStops) {
  MarkovChain chain({0.0}, {StateGrid(1, {0.0}), StateGrid(1, {0.0, 1.0})}, {1.0}, {Eigen::MatrixXd::Constant(1, 2, 0.5)});
  const auto payoff = Payoff::from_values(0.0, {{1.0}, {0.0, 2.0}});
  StoppingCircuit c(chain, payoff, Basis::polynomial(1, 0));
  c.set_alpha(1, vec({1.0}));
  QueryLedger ledger;
  auto s = SamplingOracle(chain).prepare(ledger);
  c.apply_W(2, s, ledger);
  c.apply_W(1, s, ledger);
  for (auto v : s.reg(tau_register(1))) EXPECT_EQ(v, 1u);
}

TEST(StoppingCircuit, FirstStepUsesConstantBasis) {
  const auto chain = discretize_brownian(1, 2, 3, 2.0);
  const auto payoff = put_payoff(chain, 1.0);
  StoppingCircuit c(chain, payoff, Basis::polynomial(1, 1));
  c.set_alpha(1, vec({0.2, -0.1}));
  QueryLedger ledger;
  const auto out = annotate(c, chain, 1, 1, ledger);
  const auto paths = enumerate_paths(chain);
  const BasisTable table(Basis::polynomial(1, 1), chain);
  const std::vector<Eigen::VectorXd> alpha{vec({0.2, -0.1})};
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto tau = testing::rounded_stopping_times(payoff, table, paths[i], alpha, c.format());
    const int t1 = tau[1];
    EXPECT_EQ(FixedPoint::from_raw(out[i], c.format()).decode(),
              FixedPoint::encode(payoff.value(t1, paths[i].states[static_cast<std::size_t>(t1 - 1)]), c.format()).decode());
  }
}

TEST(StoppingCircuit, AlwaysStopGivesProduct) {
  const auto chain = discretize_brownian(1, 3, 3, 2.0);
  const auto payoff = Payoff::from_values(0.0, {{1.0, 1.0, 1.0}, {0.5, 1.5, 2.0}, {0.0, 0.0, 0.0}});
  const auto basis = Basis::polynomial(1, 1);
  StoppingCircuit c(chain, payoff, basis);
  c.set_alpha(1, vec({-5.0, 0.0}));
  c.set_alpha(2, vec({-5.0, 0.0}));
  QueryLedger ledger;
  const auto out = annotate(c, chain, 2, 1, ledger);
  const auto paths = enumerate_paths(chain);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& s = paths[i].states;
    const auto expected = fixed_mul(c.payoff_fp(2, s[1]), c.basis_fp(1, s[0])[1]);
    EXPECT_EQ(out[i], expected.raw());
  }
}

TEST(StoppingCircuit, ApplyCMatchesRecursionAndIsReversible) {
  std::mt19937_64 gen(23);
  const auto inst = testing::random_instance(gen, 3, 3);
  const auto basis = Basis::polynomial(1, 1);
  StoppingCircuit c(inst.chain, inst.payoff, basis);
  std::vector<Eigen::VectorXd> alpha{vec({0.4, 0.3}), vec({1.1, -0.2})};
  for (int t = 1; t < 3; ++t) c.set_alpha(t, alpha[static_cast<std::size_t>(t - 1)]);
  const BasisTable table(basis, inst.chain);
  const auto paths = enumerate_paths(inst.chain);
  for (int t = 1; t <= 3; ++t)
    for (int k = 0; k < 2; ++k) {
      QueryLedger ledger;
      const SamplingOracle oracle(inst.chain);
      auto s = oracle.prepare(ledger);
      c.apply_C(t, k, s, "out", ledger);
      EXPECT_EQ(s.nonzero_registers(), std::vector<std::string>{"out"});
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto tau = testing::rounded_stopping_times(inst.payoff, table, paths[i], alpha, c.format());
        const int st = tau[static_cast<std::size_t>(t)];
        const auto z = c.payoff_fp(st, paths[i].states[static_cast<std::size_t>(st - 1)]);
        const auto e = t == 1 ? c.basis_fp(0, 0)[static_cast<std::size_t>(k)]
                              : c.basis_fp(t - 1, paths[i].states[static_cast<std::size_t>(t - 2)])[static_cast<std::size_t>(k)];
        EXPECT_EQ(s.reg("out")[i], fixed_mul(z, e).raw());
      }
      c.apply_C(t, k, s, "out", ledger);
      s.release_zero_registers();
      EXPECT_TRUE(s.nonzero_registers().empty());
      EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    }
}

TEST(StoppingCircuit, LedgerCounts) {
  const auto chain = discretize_brownian(1, 3, 2, 1.0);
  StoppingCircuit c(chain, put_payoff(chain, 1.0), Basis::polynomial(1, 1));
  c.set_alpha(1, vec({0, 0}));
  c.set_alpha(2, vec({0, 0}));
  QueryLedger ledger;
  annotate(c, chain, 1, 0, ledger);
  // Three W forward, three backward, one V.
  EXPECT_EQ(ledger.function("W"), 6u);
  EXPECT_EQ(ledger.function("V"), 1u);
  EXPECT_EQ(ledger.function("z"), 6u + select_query_count(3));
  EXPECT_EQ(ledger.function("e"), 6u * 2 + 1);
  EXPECT_EQ(select_query_count(3), 5u);
  EXPECT_EQ(select_query_count(1), 1u);
}

TEST(StoppingCircuit, Errors) {
  const auto chain = discretize_brownian(1, 3, 2, 1.0);
  StoppingCircuit c(chain, put_payoff(chain, 1.0), Basis::polynomial(1, 1));
  QueryLedger ledger;
  auto s = SamplingOracle(chain).prepare(ledger);
  EXPECT_THROW(c.apply_V(2, 0, s, "out", ledger), MissingAnnotation);
  EXPECT_THROW(c.apply_W(1, s, ledger), MissingAnnotation);
  s.reg(tau_register(3))[0] = 1;
  EXPECT_THROW(c.apply_C(2, 0, s, "out", ledger), DirtyAncilla);
  EXPECT_THROW(c.set_alpha(3, vec({0, 0})), InvalidArgument);
}

TEST(QuantumLsm, ScheduleSplits) {
  const auto s = quantum_schedule(3, 4, 0.1, 0.2, GramStage::kEstimated);
  EXPECT_DOUBLE_EQ(s.eps_gram, 0.025);
  EXPECT_DOUBLE_EQ(s.eps_rhs, 0.05);
  EXPECT_DOUBLE_EQ(s.delta_gram, 0.2 / (4 * 3 * 16));
  EXPECT_DOUBLE_EQ(s.delta_rhs, 0.2 / (4 * 3 * 4));
  EXPECT_DOUBLE_EQ(s.delta_final, 0.1);
  EXPECT_DOUBLE_EQ(quantum_schedule(3, 4, 0.1, 0.2, GramStage::kIdentity).delta_rhs, 0.2 / (2 * 3 * 4));
}

TEST(QuantumLsm, SmoothnessSchedules) {
  SmoothnessScheduleInput smooth;
  smooth.model = SmoothnessModel::kSmooth;
  smooth.horizon = 1;
  smooth.c = 1.0;
  smooth.epsilon = 0.1;
  smooth.n = 1;
  EXPECT_EQ(schedule_from_smoothness(smooth).q, 100);
  smooth.horizon = 2;
  smooth.epsilon = 0.5;
  EXPECT_EQ(schedule_from_smoothness(smooth).q, 100);

  SmoothnessScheduleInput lip;
  lip.model = SmoothnessModel::kLipschitz;
  lip.horizon = 1;
  lip.lambda = 1.0;
  lip.c_lipschitz = 1.0;
  lip.d = 1;
  lip.epsilon = 1.0;
  EXPECT_EQ(schedule_from_smoothness(lip).q, 880);
}

TEST(QuantumLsm, SingleStepReducesToMeanEstimation) {
  MarkovChain chain({0.0}, {StateGrid(1, {0.0, 1.0, 2.0, 3.0})}, {0.25, 0.25, 0.25, 0.25}, {});
  const auto payoff = Payoff::from_values(0.0, {{1.0, 0.0, 0.0, 0.0}});
  QuantumLsmOptions o;
  o.sigma_min_lower = 1.0;
  o.seed = 5;
  const auto run = run_quantum_lsm(chain, payoff, Basis::polynomial(1, 0), 0.05, 0.1, o);
  EXPECT_TRUE(run.alpha.empty());
  EXPECT_EQ(run.gram_stage_summary.estimations, 0);
  EXPECT_EQ(run.final_stage_summary.estimations, 1);
  EXPECT_NEAR(run.estimate, 0.25, 0.05);
}

TEST(QuantumLsm, ConstantBasisWithinSchedule) {
  // Two paths; the constant basis has sigma_min = 1.
  MarkovChain chain({0.0}, {StateGrid(1, {0.0}), StateGrid(1, {-1.0, 1.0})}, {1.0}, {Eigen::MatrixXd::Constant(1, 2, 0.5)});
  const auto payoff = Payoff::from_values(0.0, {{0.5}, {0.0, 1.0}});
  const double u0 = snell_envelope(chain, payoff).u0;
  const double eps = 0.05, delta = 0.1;
  int fails = 0;
  const int trials = 200;
  for (int i = 0; i < trials; ++i) {
    QuantumLsmOptions o;
    o.oracle_sigma_min = true;
    o.seed = derive_seed(9, static_cast<std::uint64_t>(i));
    const auto run = run_quantum_lsm(chain, payoff, Basis::polynomial(1, 0), eps, delta, o);
    const double bound = 5.0 * 5.0 * eps;
    if (std::abs(run.estimate - u0) > bound) ++fails;
  }
  EXPECT_LE(static_cast<double>(fails) / trials, delta);
}

TEST(QuantumLsm, RejectsLooseSigmaSchedule) {
  const auto chain = discretize_brownian(1, 2, 3, 2.0);
  QuantumLsmOptions o;
  o.sigma_min_lower = 0.1;
  EXPECT_THROW(run_quantum_lsm(chain, put_payoff(chain, 1.0), Basis::polynomial(1, 0), 0.2, 0.1, o), ScheduleViolation);
  QuantumLsmOptions none;
  EXPECT_THROW(run_quantum_lsm(chain, put_payoff(chain, 1.0), Basis::polynomial(1, 0), 0.01, 0.1, none), InvalidArgument);
}

}  // namespace
}  // namespace qlsm
