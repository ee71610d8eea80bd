// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "qlsm/basis.hpp"
#include "qlsm/fixed_point.hpp"
#include "qlsm/hybrid_state.hpp"
#include "qlsm/payoff.hpp"

namespace qlsm {

// Register names used by the circuits. tau registers hold the integer step.
std::string tau_register(int t);
std::string payoff_register(int t);
std::string continuation_register(int t);

// max(1, ceil(T log2 T)): z-queries booked for the select network of V.
std::uint64_t select_query_count(int horizon);

// W_t, V_t^(k) and C_t^(k) acting on path annotations. Coefficients are
// quantized once on load; every comparison uses fixed_dot / fixed_stop so
// results agree bit-exactly with the classical run in shared-rounding mode.
class StoppingCircuit {
 public:
  StoppingCircuit(const MarkovChain& chain, const Payoff& payoff, const Basis& basis, FixedPointFormat format = {});

  int horizon() const { return horizon_; }
  int basis_size() const { return m_; }
  FixedPointFormat format() const { return format_; }

  // alpha_t for t in 1..T-1.
  void set_alpha(int t, const Eigen::VectorXd& alpha);
  bool has_alpha(int t) const;
  const std::vector<FixedPoint>& alpha(int t) const;

  // Quantized payoff z_t and basis row e_t at a grid state; t = 0 gives Z_0
  // and the constant row.
  const FixedPoint& payoff_fp(int t, int state) const;
  const std::vector<FixedPoint>& basis_fp(int t, int state) const;

  void apply_W(int t, HybridState& state, QueryLedger& ledger) const;
  void apply_W_inverse(int t, HybridState& state, QueryLedger& ledger) const;
  // XORs z_{tau_t(x)} * e_{t-1,k}(x_{t-1}) into `out`; k is 0-based.
  void apply_V(int t, int k, HybridState& state, const std::string& out, QueryLedger& ledger) const;
  // W_T^dag ... W_t^dag V_t^(k) W_t ... W_T. Self-inverse on `out`.
  void apply_C(int t, int k, HybridState& state, const std::string& out, QueryLedger& ledger) const;

 private:
  void check_t(int t, int lo) const;
  void xor_w(int t, HybridState& state, bool inverse) const;
  void book_w(QueryLedger& ledger) const;

  int horizon_;
  int m_;
  FixedPointFormat format_;
  FixedPoint z0_;
  std::vector<std::vector<FixedPoint>> payoff_;                // [t-1][state]
  std::vector<std::vector<std::vector<FixedPoint>>> basis_;    // [t][state][k], t < T
  std::vector<std::vector<FixedPoint>> alpha_;                 // [t-1]
};

// C_t^(k) viewed as a function oracle for qmontecarlo.
class StoppingFunction : public FunctionCircuit {
 public:
  StoppingFunction(const StoppingCircuit& circuit, int t, int k);
  const std::string& name() const override { return name_; }
  FixedPointFormat format() const override { return circuit_.format(); }
  void apply(HybridState& state, const std::string& out, QueryLedger& ledger) const override;

 private:
  const StoppingCircuit& circuit_;
  int t_;
  int k_;
  std::string name_;
};

}  // namespace qlsm
