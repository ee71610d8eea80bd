// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlsm/chain.hpp"

namespace qlsm {

enum class BasisKind { kGenericPolynomial, kHermiteTruncated, kGbmMonomialTruncated, kCustom };

std::string to_string(BasisKind kind);

// e(t, k, x) for a custom family; k is 0-based.
using BasisFn = std::function<double(int t, int k, std::span<const double> x)>;

class Basis {
 public:
  // Monomials x^k with |k| <= q, no truncation.
  static Basis polynomial(int d, int q);
  // Normalized Hermite products on the cube [-lambda, lambda]^d.
  static Basis hermite(int d, int q, double lambda = std::numeric_limits<double>::infinity());
  // Martingale-corrected monomials with multi-indices {0..q}^d, cut at the cube.
  static Basis gbm(int d, int q, double lambda = std::numeric_limits<double>::infinity());
  static Basis custom(std::string name, int d, int m, BasisFn fn);

  BasisKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dimension() const { return d_; }
  int size() const { return m_; }
  int degree() const { return q_; }
  double lambda() const { return lambda_; }
  const std::vector<std::vector<int>>& multi_indices() const { return indices_; }

  bool in_cube(std::span<const double> x) const;
  double value(int t, int k, std::span<const double> x) const;
  void values(int t, std::span<const double> x, std::span<double> out) const;

 private:
  Basis() = default;

  BasisKind kind_ = BasisKind::kCustom;
  std::string name_;
  int d_ = 0;
  int m_ = 0;
  int q_ = 0;
  double lambda_ = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> indices_;
  std::vector<double> log_norm_;  // per-degree Hermite normalizer, log space
  BasisFn custom_;
};

// Physicists' Hermite polynomial.
double hermite(int k, double x);

// Basis values on every grid point of steps 1..T-1.
class BasisTable {
 public:
  BasisTable(const Basis& basis, const MarkovChain& chain);
  int size() const { return m_; }
  // Row of m values for state i at step t; t = 0 is the constant e_0 = 1.
  std::span<const double> row(int t, int i) const;

 private:
  int m_;
  std::vector<double> ones_;
  std::vector<std::vector<double>> values_;
};

struct BasisNorms {
  double l2 = 0.0;   // max_{t,k} ||e_{t,k}||_{L2(rho_t)}
  double sup = 0.0;  // max over grid points of |e_{t,k}|
};
BasisNorms basis_norms(const Basis& basis, const MarkovChain& chain);

enum class GramMode { kExact, kMonteCarlo };

struct GramResult {
  Eigen::MatrixXd matrix;
  GramMode mode = GramMode::kExact;
};

// A_t = E[e(X_t) e(X_t)^T]; exact when |E_t| <= cap, sampled otherwise.
GramResult gram_matrix(const Basis& basis, const MarkovChain& chain, int t,
                       std::size_t cap = kDefaultEnumerationCap, std::uint64_t seed = 0,
                       std::size_t mc_samples = 100000);

// Untruncated Gram under the continuous model.
std::optional<Eigen::MatrixXd> closed_form_gram(const Basis& basis, double t);

struct TailBound {
  double exact_form = 0.0;
  double simplified = 0.0;
};
// Bounds on |int_lambda^inf H_k H_l e^{-x^2} dx|, l <= k.
TailBound hermite_tail_bound(int k, int l, double lambda);

// Bound on int_lambda^inf x^k of the log-normal(-t/2, t) density.
double gbm_tail_bound(int k, double lambda, double t);
// The bound relies on erfc(y) <= e^{-y^2}, which needs y >= 0.
bool gbm_tail_bound_applies(int k, double lambda, double t);

struct SigmaMinBound {
  double sharp = 0.0;       // bound on 1/sigma_min
  double simplified = 0.0;  // e^{3qd} q^{2d}
  bool ordered = false;     // sharp <= simplified; fails for small t
};
SigmaMinBound vandermonde_sigma_min_bound(int q, int d, double t);

double jackson_smooth_bound(int q, int n, double c);
double jackson_lipschitz_bound(int q, double lambda, double c_lipschitz, int d);

// Frobenius bound on ||A_t - I|| for the truncated Hermite Gram under the
// continuous Gaussian marginal, assembled from hermite_tail_bound.
double hermite_truncation_gram_bound(const Basis& basis, double t);

}  // namespace qlsm
