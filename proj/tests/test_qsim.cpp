// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlsm/amplitude_estimation.hpp"
#include "qlsm/error.hpp"
#include "qlsm/hybrid_state.hpp"
#include "qlsm/qmontecarlo.hpp"

namespace qlsm {
namespace {

SamplingOracle uniform_oracle(int n) {
  std::vector<Path> paths;
  for (int i = 0; i < n; ++i) paths.push_back({{i}, 1.0 / n});
  return SamplingOracle(paths, 1);
}

TEST(HybridState, PreparationAmplitudes) {
  QueryLedger ledger;
  const auto one = uniform_oracle(1).prepare(ledger);
  EXPECT_EQ(one.amp0(0), std::complex<double>(1.0, 0.0));
  const auto four = uniform_oracle(4).prepare(ledger);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(four.amp0(i).real(), 0.5, 1e-15);
  EXPECT_NEAR(four.norm_squared(), 1.0, 1e-15);
  EXPECT_EQ(ledger.state_preps(), 2u);
}

TEST(HybridState, FunctionOracleXorsIntoRegister) {
  QueryLedger ledger;
  auto s = uniform_oracle(3).prepare(ledger);
  const FixedPointFormat f{4, 8};
  const std::vector<double> v{0.5, 1.25, 3.0};
  FunctionOracle h("h", v, f);
  h.apply(s, "out", ledger);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(FixedPoint::from_raw(s.reg("out")[i], f).decode(), v[i]);
  EXPECT_EQ(ledger.function("h"), 1u);
  h.apply_inverse(s, "out", ledger);
  EXPECT_FALSE(s.is_set("out"));
  EXPECT_THROW(FunctionOracle("big", {100.0}, f), Overflow);
}

TEST(HybridState, RotationSemantics) {
  QueryLedger ledger;
  const FixedPointFormat f{2, 4};
  auto s = uniform_oracle(3).prepare(ledger);
  FunctionOracle h("h", {2.0, 0.0, 3.5}, f);
  h.apply(s, "r", ledger);
  const RotationInterval iv{FixedPoint::encode(0.0, f), FixedPoint::encode(2.0, f), 1, FixedPoint::encode(0.0, f)};
  rotate_on_register(s, "r", iv, ledger);
  EXPECT_NEAR(std::norm(s.amp1(0)), 1.0 / 3.0, 1e-15);  // h = b: full rotation
  EXPECT_NEAR(std::norm(s.amp0(0)), 0.0, 1e-15);
  EXPECT_NEAR(std::norm(s.amp1(1)), 0.0, 1e-15);         // h = a = 0
  EXPECT_NEAR(std::norm(s.amp0(2)), 1.0 / 3.0, 1e-15);   // outside interval: unchanged
  EXPECT_NEAR(s.good_probability(), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(ledger.rotations(), 1u);
}

TEST(HybridState, ControlledRotationReleasesScratch) {
  QueryLedger ledger;
  const FixedPointFormat f{2, 4};
  auto s = uniform_oracle(2).prepare(ledger);
  FunctionOracle h("h", {1.0, 0.5}, f);
  controlled_rotation(s, h, {FixedPoint::encode(0.0, f), FixedPoint::encode(1.0, f), 1, FixedPoint::encode(0.0, f)}, ledger);
  EXPECT_TRUE(s.nonzero_registers().empty());
  EXPECT_NEAR(s.good_probability(), 0.5 * 1.0 + 0.5 * 0.5, 1e-15);
  EXPECT_EQ(ledger.function("h"), 2u);
}

TEST(QueryLedger, CostModel) {
  QueryLedger l;
  l.add_state_prep(2);
  l.add_function("z", 3);
  l.add_function("e", 5);
  EXPECT_EQ(l.cost(4), 4.0 * 2 + 3 + 5);
  EXPECT_EQ(l.cost(4, {2.0, 10.0, 0.5}), 4.0 * 2 * 2 + 30 + 2.5);
  QueryLedger m;
  m.add(l, 3);
  EXPECT_EQ(m.function("z"), 9u);
}

TEST(AmplitudeEstimation, EdgeAmplitudesAreExact) {
  for (int m : {4, 8, 16}) {
    const auto p0 = ae_distribution(0.0, m);
    const auto p1 = ae_distribution(1.0, m);
    EXPECT_NEAR(p0[0], 1.0, 1e-12);
    double at_one = 0.0;
    for (std::size_t y = 0; y < p1.size(); ++y)
      if (ae_estimate(static_cast<int>(y), m) == 1.0) at_one += p1[y];
    EXPECT_NEAR(at_one, 1.0, 1e-12);
    Rng rng(1);
    EXPECT_EQ(ae_sample(0.0, m, rng).estimate, 0.0);
    EXPECT_EQ(ae_sample(1.0, m, rng).estimate, 1.0);
  }
}

TEST(AmplitudeEstimation, AnalyticMatchesStatevector) {
  const std::vector<double> prob{0.25, 0.25, 0.5};
  for (double a : {0.1, 0.5}) {
    const std::vector<double> ratio{a, a, a};
    const auto x = ae_distribution(a, 8);
    const auto y = ae_distribution_statevector(prob, ratio, 8);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-9);
  }
  EXPECT_THROW(ae_distribution(0.5, 6), InvalidArgument);
}

TEST(AmplitudeEstimation, SuccessProbabilityAtLeastEightOverPiSquared) {
  const double a = 0.3;
  const int m = 32;
  const auto p = ae_distribution(a, m);
  const double tol = 2.0 * std::numbers::pi * std::sqrt(a * (1 - a)) / m + std::numbers::pi * std::numbers::pi / (m * m);
  double good = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y)
    if (std::abs(ae_estimate(static_cast<int>(y), m) - a) <= tol) good += p[y];
  EXPECT_GE(good, 8.0 / (std::numbers::pi * std::numbers::pi));
}

TEST(AmplitudeEstimation, BooksGroverIterations) {
  QueryLedger prep, ledger;
  prep.add_state_prep();
  Rng rng(4);
  amplitude_estimation(0.2, 16, prep, ledger, rng);
  EXPECT_EQ(ledger.grover(), 16u);
  EXPECT_EQ(ledger.state_preps(), 33u);
}

TEST(QMonteCarlo, ConstantIsExact) {
  const auto oracle = uniform_oracle(4);
  FunctionOracle h("h", {0.75, 0.75, 0.75, 0.75});
  Rng rng(3);
  for (double eps : {0.1, 0.01}) {
    const auto r = qmontecarlo(oracle, h, eps, 0.1, 0.01, rng, {.range_bound = 1.0});
    EXPECT_EQ(r.estimate, 0.75);
    EXPECT_EQ(r.exact_mean, 0.75);
  }
}

TEST(QMonteCarlo, IndicatorFailureRate) {
  const auto oracle = uniform_oracle(4);
  FunctionOracle h("h", {1.0, 0.0, 0.0, 0.0});
  const double eps = 0.05, delta = 0.1, sigma = std::sqrt(0.25 * 0.75);
  int fails = 0;
  const int trials = 500;
  for (int i = 0; i < trials; ++i) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(i)));
    const auto r = qmontecarlo(oracle, h, eps, delta, sigma, rng, {.range_bound = 1.0});
    if (std::abs(r.estimate - 0.25) > eps) ++fails;
  }
  EXPECT_LE(static_cast<double>(fails) / trials, delta + 3.0 * std::sqrt(delta * (1 - delta) / trials));
}

TEST(QMonteCarlo, QueryCountScalesLinearly) {
  const auto oracle = uniform_oracle(4);
  FunctionOracle h("h", {1.0, 0.0, 0.5, 0.25});
  Rng a(1), b(1);
  const double sigma = 0.5;
  const auto r1 = qmontecarlo(oracle, h, 0.01, 0.1, sigma, a, {.range_bound = 1.0});
  const auto r2 = qmontecarlo(oracle, h, 0.005, 0.1, sigma, b, {.range_bound = 1.0});
  const double ratio = static_cast<double>(r2.ledger.grover()) / static_cast<double>(r1.ledger.grover());
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.6);
}

TEST(QMonteCarlo, VarianceCheck) {
  const auto oracle = uniform_oracle(2);
  FunctionOracle h("h", {0.0, 1.0});
  Rng rng(2);
  EXPECT_THROW(qmontecarlo(oracle, h, 0.05, 0.1, 0.1, rng, {.range_bound = 1.0}), VarianceExceeded);
  const auto r = qmontecarlo(oracle, h, 0.05, 0.1, 0.1, rng, {.range_bound = 1.0, .allow_variance_excess = true});
  EXPECT_TRUE(r.variance_exceeded);
}

TEST(QMonteCarlo, RoundingGuard) {
  const auto oracle = uniform_oracle(2);
  FunctionOracle h("h", {0.0, 1.0}, FixedPointFormat{2, 4});
  Rng rng(2);
  EXPECT_THROW(qmontecarlo(oracle, h, 0.01, 0.1, 0.5, rng), ScheduleViolation);
}

}  // namespace
}  // namespace qlsm
