// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/amplitude_estimation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "qlsm/error.hpp"

namespace qlsm {

namespace {

constexpr double kIntegerTol = 1e-12;

void check_m(int m) {
  if (m < 1 || !is_power_of_two(m)) throw InvalidArgument("AE needs M a power of two");
}

double check_a(double a) {
  if (!(a >= -1e-12 && a <= 1.0 + 1e-12)) throw InvalidArgument("good amplitude must lie in [0,1]");
  return std::clamp(a, 0.0, 1.0);
}

// Fejer kernel |(1/M) sum_j e^{2 pi i j u / M}|^2 at offset u.
double fejer(double u, int m) {
  const double r = std::round(u);
  if (std::abs(u - r) < kIntegerTol) {
    const long long k = static_cast<long long>(r);
    return ((k % m) + m) % m == 0 ? 1.0 : 0.0;
  }
  const double num = std::sin(std::numbers::pi * u);
  const double den = static_cast<double>(m) * std::sin(std::numbers::pi * u / m);
  return (num * num) / (den * den);
}

// M * theta / pi with sin^2 theta = a.
double phase_position(double a, int m) { return m * std::asin(std::sqrt(a)) / std::numbers::pi; }

}  // namespace

bool is_power_of_two(long long m) { return m > 0 && (m & (m - 1)) == 0; }

double ae_estimate(int outcome, int m) {
  const double s = std::sin(std::numbers::pi * outcome / m);
  return s * s;
}

std::vector<double> ae_distribution(double a, int m) {
  check_m(m);
  a = check_a(a);
  const double c = phase_position(a, m);
  std::vector<double> p(static_cast<std::size_t>(m));
  for (int y = 0; y < m; ++y) p[static_cast<std::size_t>(y)] = 0.5 * (fejer(y - c, m) + fejer(y + c, m));
  return p;
}

std::vector<double> ae_distribution_statevector(const std::vector<double>& path_prob, const std::vector<double>& good_ratio,
                                                int m) {
  check_m(m);
  if (path_prob.empty() || path_prob.size() != good_ratio.size()) throw InvalidArgument("statevector AE input mismatch");
  int path_qubits = 0;
  while ((std::size_t{1} << path_qubits) < path_prob.size()) ++path_qubits;
  int phase_qubits = 0;
  while ((1 << phase_qubits) < m) ++phase_qubits;
  if (phase_qubits + path_qubits + 1 > 12) throw InvalidArgument("statevector AE limited to 12 qubits");

  const Eigen::Index np = Eigen::Index{1} << path_qubits;
  const Eigen::Index dim = 2 * np;  // index = 2 * x + qubit
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(np);
  for (std::size_t x = 0; x < path_prob.size(); ++x) psi(static_cast<Eigen::Index>(x)) = std::sqrt(path_prob[x]);
  psi /= psi.norm();

  // U: Householder reflection taking |0> to psi.
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(np, np);
  Eigen::VectorXd v = -psi;
  v(0) += 1.0;
  if (v.squaredNorm() > 1e-30) u -= 2.0 * v * v.transpose() / v.squaredNorm();

  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index x = 0; x < np; ++x) {
    const double r = x < static_cast<Eigen::Index>(good_ratio.size()) ? good_ratio[static_cast<std::size_t>(x)] : 0.0;
    const double c = std::sqrt(1.0 - r), s = std::sqrt(r);
    rot(2 * x, 2 * x) = c;
    rot(2 * x, 2 * x + 1) = -s;
    rot(2 * x + 1, 2 * x) = s;
    rot(2 * x + 1, 2 * x + 1) = c;
  }
  Eigen::MatrixXd u_full = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j) {
      u_full(2 * i, 2 * j) = u(i, j);
      u_full(2 * i + 1, 2 * j + 1) = u(i, j);
    }
  const Eigen::MatrixXd a_op = rot * u_full;

  Eigen::MatrixXd s0 = Eigen::MatrixXd::Identity(dim, dim);
  s0(0, 0) = -1.0;
  Eigen::MatrixXd s_good = Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index x = 0; x < np; ++x) s_good(2 * x + 1, 2 * x + 1) = -1.0;
  const Eigen::MatrixXd q = -a_op * s0 * a_op.transpose() * s_good;

  // Controlled powers then inverse QFT on the phase register.
  std::vector<Eigen::VectorXd> powers;
  Eigen::VectorXd cur = a_op.col(0);
  for (int j = 0; j < m; ++j) {
    powers.push_back(cur);
    cur = q * cur;
  }
  std::vector<double> p(static_cast<std::size_t>(m));
  for (int y = 0; y < m; ++y) {
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(dim);
    for (int j = 0; j < m; ++j)
      amp += std::polar(1.0, -2.0 * std::numbers::pi * j * y / m) * powers[static_cast<std::size_t>(j)].cast<std::complex<double>>();
    amp /= static_cast<double>(m);
    p[static_cast<std::size_t>(y)] = amp.squaredNorm();
  }
  return p;
}

AeResult ae_sample(double a, int m, Rng& rng) {
  check_m(m);
  a = check_a(a);
  const double c0 = phase_position(a, m);
  // Pick one of the two eigenphase branches, then scan outward from its peak.
  const double c = rng.uniform() < 0.5 ? c0 : -c0;
  const double u = rng.uniform();
  const long long peak = std::llround(c);
  double acc = 0.0;
  long long y = peak;
  for (int step = 0; step < m; ++step) {
    const long long off = (step + 1) / 2;
    y = step % 2 == 1 ? peak + off : peak - off;
    acc += fejer(static_cast<double>(y) - c, m);
    if (u < acc) break;
  }
  const int outcome = static_cast<int>(((y % m) + m) % m);
  return {outcome, ae_estimate(outcome, m)};
}

AeResult amplitude_estimation(double a, int m, const QueryLedger& prep_cost, QueryLedger& ledger, Rng& rng) {
  const AeResult r = ae_sample(a, m, rng);
  ledger.add_grover(static_cast<std::uint64_t>(m));
  ledger.add(prep_cost, 2 * static_cast<std::uint64_t>(m) + 1);
  return r;
}

AeResult amplitude_estimation(const HybridState& prepared, int m, const QueryLedger& prep_cost, QueryLedger& ledger,
                              Rng& rng) {
  return amplitude_estimation(prepared.good_probability(), m, prep_cost, ledger, rng);
}

}  // namespace qlsm
