// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/stopping_circuits.hpp"

#include <cmath>

#include "qlsm/error.hpp"

namespace qlsm {

std::string tau_register(int t) { return "tau[" + std::to_string(t) + "]"; }
std::string payoff_register(int t) { return "z[" + std::to_string(t) + "]"; }
std::string continuation_register(int t) { return "f[" + std::to_string(t) + "]"; }

std::uint64_t select_query_count(int horizon) {
  if (horizon <= 1) return 1;
  const double v = static_cast<double>(horizon) * std::log2(static_cast<double>(horizon));
  return static_cast<std::uint64_t>(std::max<std::int64_t>(1, ceil_tolerant(v)));
}

StoppingCircuit::StoppingCircuit(const MarkovChain& chain, const Payoff& payoff, const Basis& basis,
                                 FixedPointFormat format)
    : horizon_(chain.horizon()), m_(basis.size()), format_(format) {
  check_format(format_);
  if (payoff.horizon() != horizon_) throw InvalidArgument("payoff horizon does not match chain");
  z0_ = FixedPoint::encode(payoff.z0(), format_);
  payoff_.resize(static_cast<std::size_t>(horizon_));
  for (int t = 1; t <= horizon_; ++t)
    for (double v : payoff.values(t)) payoff_[static_cast<std::size_t>(t - 1)].push_back(FixedPoint::encode(v, format_));
  const BasisTable table(basis, chain);
  // Rows for t = 1..T-1; the final step never needs basis values.
  basis_.resize(static_cast<std::size_t>(horizon_));
  basis_[0].push_back(std::vector<FixedPoint>(static_cast<std::size_t>(m_), FixedPoint::encode(1.0, format_)));
  for (int t = 1; t < horizon_; ++t)
    for (std::size_t i = 0; i < chain.grid_size(t); ++i) {
      std::vector<FixedPoint> row;
      for (double v : table.row(t, static_cast<int>(i))) row.push_back(FixedPoint::encode(v, format_));
      basis_[static_cast<std::size_t>(t)].push_back(std::move(row));
    }
  alpha_.resize(static_cast<std::size_t>(std::max(0, horizon_ - 1)));
}

void StoppingCircuit::check_t(int t, int lo) const {
  if (t < lo || t > horizon_) throw InvalidArgument("circuit time index out of range: " + std::to_string(t));
}

void StoppingCircuit::set_alpha(int t, const Eigen::VectorXd& alpha) {
  if (t < 1 || t >= horizon_) throw InvalidArgument("alpha index must be in 1..T-1");
  if (alpha.size() != m_) throw InvalidArgument("alpha has wrong length");
  auto& dst = alpha_[static_cast<std::size_t>(t - 1)];
  dst.clear();
  for (Eigen::Index k = 0; k < alpha.size(); ++k) dst.push_back(FixedPoint::encode(alpha[k], format_));
}

bool StoppingCircuit::has_alpha(int t) const {
  return t >= 1 && t < horizon_ && !alpha_[static_cast<std::size_t>(t - 1)].empty();
}

const std::vector<FixedPoint>& StoppingCircuit::alpha(int t) const {
  if (!has_alpha(t)) throw InvalidArgument("alpha_" + std::to_string(t) + " not loaded");
  return alpha_[static_cast<std::size_t>(t - 1)];
}

const FixedPoint& StoppingCircuit::payoff_fp(int t, int state) const {
  if (t == 0) return z0_;
  return payoff_[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(state)];
}

const std::vector<FixedPoint>& StoppingCircuit::basis_fp(int t, int state) const {
  if (t == 0) return basis_[0][0];
  return basis_[static_cast<std::size_t>(t)][static_cast<std::size_t>(state)];
}

void StoppingCircuit::book_w(QueryLedger& ledger) const {
  ledger.add_function("W");
  ledger.add_function("z");
  ledger.add_function("e", static_cast<std::uint64_t>(m_));
}

// Forward: z, f, then tau from the registers. Inverse runs the same XORs in
// reverse order, which is valid because each step only reads registers
// written before it.
void StoppingCircuit::xor_w(int t, HybridState& state, bool inverse) const {
  const std::size_t n = state.size();
  auto& tau = state.reg(tau_register(t));
  if (t == horizon_) {
    for (std::size_t i = 0; i < n; ++i) tau[i] ^= static_cast<std::uint64_t>(horizon_);
    return;
  }
  if (!state.is_set(tau_register(t + 1)))
    throw MissingAnnotation("W_" + std::to_string(t) + " needs " + tau_register(t + 1));
  const auto& next = *state.find_reg(tau_register(t + 1));
  const auto& a = alpha(t);
  auto& z = state.reg(payoff_register(t));
  auto& f = state.reg(continuation_register(t));
  auto write_zf = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const int s = state.path(i).states[static_cast<std::size_t>(t - 1)];
      z[i] ^= payoff_fp(t, s).raw();
      f[i] ^= fixed_dot(a, basis_fp(t, s), format_).raw();
    }
  };
  auto write_tau = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const bool stop = fixed_stop(FixedPoint::from_raw(z[i], format_), FixedPoint::from_raw(f[i], format_));
      tau[i] ^= stop ? static_cast<std::uint64_t>(t) : next[i];
    }
  };
  if (!inverse) {
    write_zf();
    write_tau();
  } else {
    write_tau();
    write_zf();
  }
}

void StoppingCircuit::apply_W(int t, HybridState& state, QueryLedger& ledger) const {
  check_t(t, 1);
  xor_w(t, state, false);
  book_w(ledger);
}

void StoppingCircuit::apply_W_inverse(int t, HybridState& state, QueryLedger& ledger) const {
  check_t(t, 1);
  xor_w(t, state, true);
  book_w(ledger);
}

void StoppingCircuit::apply_V(int t, int k, HybridState& state, const std::string& out, QueryLedger& ledger) const {
  check_t(t, 1);
  if (k < 0 || k >= m_) throw InvalidArgument("basis index out of range: " + std::to_string(k));
  if (!state.is_set(tau_register(t))) throw MissingAnnotation("V_" + std::to_string(t) + " needs " + tau_register(t));
  const auto& tau = *state.find_reg(tau_register(t));
  auto& dst = state.reg(out);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& states = state.path(i).states;
    const int stop = static_cast<int>(tau[i]);
    const FixedPoint& z = payoff_fp(stop, states[static_cast<std::size_t>(stop - 1)]);
    const FixedPoint& e =
        t == 1 ? basis_fp(0, 0)[static_cast<std::size_t>(k)]
               : basis_fp(t - 1, states[static_cast<std::size_t>(t - 2)])[static_cast<std::size_t>(k)];
    dst[i] ^= fixed_mul(z, e).raw();
  }
  ledger.add_function("V");
  ledger.add_function("z", select_query_count(horizon_));
  ledger.add_function("e");
}

void StoppingCircuit::apply_C(int t, int k, HybridState& state, const std::string& out, QueryLedger& ledger) const {
  check_t(t, 1);
  for (int s = t; s <= horizon_; ++s)
    for (const auto& name : {tau_register(s), payoff_register(s), continuation_register(s)})
      if (state.is_set(name)) throw DirtyAncilla("register " + name + " is not clean");
  for (int s = horizon_; s >= t; --s) apply_W(s, state, ledger);
  apply_V(t, k, state, out, ledger);
  for (int s = t; s <= horizon_; ++s) apply_W_inverse(s, state, ledger);
  state.release_zero_registers();
}

StoppingFunction::StoppingFunction(const StoppingCircuit& circuit, int t, int k)
    : circuit_(circuit), t_(t), k_(k), name_("C[" + std::to_string(t) + "," + std::to_string(k) + "]") {}

void StoppingFunction::apply(HybridState& state, const std::string& out, QueryLedger& ledger) const {
  circuit_.apply_C(t_, k_, state, out, ledger);
}

}  // namespace qlsm
