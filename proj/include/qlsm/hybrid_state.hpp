// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json_fwd.hpp>

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qlsm/chain.hpp"
#include "qlsm/fixed_point.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

struct CostWeights {
  double samp = 1.0;
  double z = 1.0;
  double e = 1.0;
};

// Exact oracle-call counts. Underlying payoff and basis queries are booked
// under the names "z" and "e"; composite circuits also book their own name.
class QueryLedger {
 public:
  void add_state_prep(std::uint64_t n = 1) { state_preps_ += n; }
  void add_function(const std::string& name, std::uint64_t n = 1) { functions_[name] += n; }
  void add_rotation(std::uint64_t n = 1) { rotations_ += n; }
  void add_grover(std::uint64_t n = 1) { grover_ += n; }
  // Adds `times` copies of another ledger.
  void add(const QueryLedger& other, std::uint64_t times = 1);

  std::uint64_t state_preps() const { return state_preps_; }
  std::uint64_t rotations() const { return rotations_; }
  std::uint64_t grover() const { return grover_; }
  std::uint64_t function(const std::string& name) const;
  const std::map<std::string, std::uint64_t>& functions() const { return functions_; }
  bool empty() const;

  // T * T_samp * #U + T_z * #z + T_e * #e
  double cost(int horizon, const CostWeights& w = {}) const;

  nlohmann::json to_json() const;

 private:
  std::uint64_t state_preps_ = 0;
  std::uint64_t rotations_ = 0;
  std::uint64_t grover_ = 0;
  std::map<std::string, std::uint64_t> functions_;
};

// Superposition over path basis states. Each basis state carries classical
// register annotations and one rotation qubit (amp0, amp1).
class HybridState {
 public:
  explicit HybridState(std::shared_ptr<const std::vector<Path>> paths);

  std::size_t size() const { return paths_->size(); }
  const Path& path(std::size_t i) const { return (*paths_)[i]; }
  const std::vector<Path>& paths() const { return *paths_; }

  std::complex<double> amp0(std::size_t i) const { return amp0_[i]; }
  std::complex<double> amp1(std::size_t i) const { return amp1_[i]; }
  void set_amplitudes(std::vector<std::complex<double>> amp0);
  double norm_squared() const;
  // Probability of the rotation qubit reading 1.
  double good_probability() const;
  // R_y on the rotation qubit of basis state i.
  void rotate(std::size_t i, double cos_half, double sin_half);
  void reset_rotation_qubit();

  // Register contents (raw fixed-point words), created zeroed on demand.
  std::vector<std::uint64_t>& reg(const std::string& name);
  const std::vector<std::uint64_t>* find_reg(const std::string& name) const;
  // Register exists and is nonzero on some basis state.
  bool is_set(const std::string& name) const;
  std::vector<std::string> nonzero_registers() const;
  // Drops registers that are zero everywhere.
  void release_zero_registers();

 private:
  std::shared_ptr<const std::vector<Path>> paths_;
  std::vector<std::complex<double>> amp0_;
  std::vector<std::complex<double>> amp1_;
  std::map<std::string, std::vector<std::uint64_t>> regs_;
};

// U|0> = sum_x sqrt(p(x)) |x>.
class SamplingOracle {
 public:
  explicit SamplingOracle(const MarkovChain& chain, std::size_t cap = kDefaultEnumerationCap);
  SamplingOracle(std::vector<Path> paths, int horizon);

  int horizon() const { return horizon_; }
  std::shared_ptr<const std::vector<Path>> paths() const { return paths_; }
  std::vector<double> probabilities() const;

  HybridState prepare(QueryLedger& ledger) const;
  // Computational-basis measurement of a prepared state.
  std::size_t measure(const HybridState& state, Rng& rng) const;

 private:
  std::shared_ptr<const std::vector<Path>> paths_;
  int horizon_;
};

// Reversible map |x>|b> -> |x>|b xor h(x)> on one register.
class FunctionCircuit {
 public:
  virtual ~FunctionCircuit() = default;
  virtual const std::string& name() const = 0;
  virtual FixedPointFormat format() const = 0;
  virtual void apply(HybridState& state, const std::string& out, QueryLedger& ledger) const = 0;
  // XOR semantics make the map self-inverse by default.
  virtual void apply_inverse(HybridState& state, const std::string& out, QueryLedger& ledger) const {
    apply(state, out, ledger);
  }
};

// V_h for a table of values, one per path basis state.
class FunctionOracle : public FunctionCircuit {
 public:
  // Each application books `unit_cost`; by default one count under `name`.
  // Throws Overflow naming the offending basis states.
  FunctionOracle(std::string name, const std::vector<double>& values, FixedPointFormat format = {},
                 std::optional<QueryLedger> unit_cost = std::nullopt);

  const std::string& name() const override { return name_; }
  FixedPointFormat format() const override { return format_; }
  void apply(HybridState& state, const std::string& out, QueryLedger& ledger) const override;
  const std::vector<FixedPoint>& values() const { return values_; }

 private:
  std::string name_;
  QueryLedger unit_cost_;
  FixedPointFormat format_;
  std::vector<FixedPoint> values_;
};

// Interval [a, b] on the transformed value sign * (Q(h) - offset).
struct RotationInterval {
  FixedPoint a;
  FixedPoint b;
  int sign = 1;
  FixedPoint offset;
};

// R^h_{a,b}: reads a register and rotates the qubit by Q(h)/Q(b) inside the
// interval. Books one rotation.
void rotate_on_register(HybridState& state, const std::string& reg, const RotationInterval& interval, QueryLedger& ledger);

// Full construction: V_h into a scratch register, rotation, V_h again.
void controlled_rotation(HybridState& state, const FunctionCircuit& h, const RotationInterval& interval, QueryLedger& ledger);

}  // namespace qlsm
