// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace qlsm {

// Deterministic stream generator. Each (seed, stream) pair yields an
// independent sequence, so paths and trials can be drawn in any order.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next() { return engine_(); }

  // Index i with probability weights[i] / sum(weights).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> values);

// Pairwise reduction of leaf(i), i in [0, n), into a rows x cols matrix.
Eigen::MatrixXd pairwise_reduce(std::size_t n, Eigen::Index rows, Eigen::Index cols,
                                const std::function<void(std::size_t, Eigen::MatrixXd&)>& add_leaf);

// ceil(x), except values within rounding noise of an integer map to it.
std::int64_t ceil_tolerant(double x);

double sigma_min(const Eigen::MatrixXd& a);
double sigma_max(const Eigen::MatrixXd& a);

// Solves a x = b by column-pivoted QR. Throws SingularGram(t, sigma_min)
// when a is numerically singular.
Eigen::VectorXd solve_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int t);

double binomial(int n, int k);

// Runs fn(i) for i in [0, n) on up to `threads` workers (0: hardware
// concurrency). The first exception is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace qlsm
