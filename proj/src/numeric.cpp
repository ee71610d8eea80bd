// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/numeric.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "qlsm/error.hpp"

namespace qlsm {

namespace {

constexpr std::size_t kPairwiseLeaf = 32;

double pairwise_range(const double* v, std::size_t n) {
  if (n <= kPairwiseLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_range(v, h) + pairwise_range(v + h, n - h);
}

void reduce_range(std::size_t lo, std::size_t hi, Eigen::MatrixXd& acc,
                  const std::function<void(std::size_t, Eigen::MatrixXd&)>& add_leaf) {
  if (hi - lo <= kPairwiseLeaf) {
    for (std::size_t i = lo; i < hi; ++i) add_leaf(i, acc);
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  Eigen::MatrixXd right = Eigen::MatrixXd::Zero(acc.rows(), acc.cols());
  reduce_range(lo, mid, acc, add_leaf);
  reduce_range(mid, hi, right, add_leaf);
  acc += right;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c),    static_cast<std::uint32_t>(c >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double pairwise_sum(std::span<const double> values) { return pairwise_range(values.data(), values.size()); }

Eigen::MatrixXd pairwise_reduce(std::size_t n, Eigen::Index rows, Eigen::Index cols,
                                const std::function<void(std::size_t, Eigen::MatrixXd&)>& add_leaf) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
  if (n > 0) reduce_range(0, n, acc, add_leaf);
  return acc;
}

std::int64_t ceil_tolerant(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

double sigma_min(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double sigma_max(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

Eigen::VectorXd solve_gram(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int t) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 1e-12 * std::max(1.0, s(0)))) throw SingularGram(t, smin);
  return a.colPivHouseholderQr().solve(b);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace qlsm
