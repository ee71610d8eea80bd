// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/hybrid_state.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "qlsm/error.hpp"

namespace qlsm {

void QueryLedger::add(const QueryLedger& other, std::uint64_t times) {
  state_preps_ += other.state_preps_ * times;
  rotations_ += other.rotations_ * times;
  grover_ += other.grover_ * times;
  for (const auto& [k, v] : other.functions_) functions_[k] += v * times;
}

std::uint64_t QueryLedger::function(const std::string& name) const {
  const auto it = functions_.find(name);
  return it == functions_.end() ? 0 : it->second;
}

bool QueryLedger::empty() const {
  if (state_preps_ || rotations_ || grover_) return false;
  for (const auto& [k, v] : functions_)
    if (v) return false;
  return true;
}

double QueryLedger::cost(int horizon, const CostWeights& w) const {
  return static_cast<double>(horizon) * w.samp * static_cast<double>(state_preps_) +
         w.z * static_cast<double>(function("z")) + w.e * static_cast<double>(function("e"));
}

nlohmann::json QueryLedger::to_json() const {
  nlohmann::json j;
  j["state_preparations"] = state_preps_;
  j["rotations"] = rotations_;
  j["grover"] = grover_;
  j["functions"] = functions_;
  return j;
}

HybridState::HybridState(std::shared_ptr<const std::vector<Path>> paths)
    : paths_(std::move(paths)), amp0_(paths_->size()), amp1_(paths_->size()) {}

void HybridState::set_amplitudes(std::vector<std::complex<double>> amp0) {
  if (amp0.size() != size()) throw InvalidArgument("amplitude vector size mismatch");
  amp0_ = std::move(amp0);
  std::fill(amp1_.begin(), amp1_.end(), std::complex<double>{});
}

double HybridState::norm_squared() const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) terms[i] = std::norm(amp0_[i]) + std::norm(amp1_[i]);
  return pairwise_sum(terms);
}

double HybridState::good_probability() const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) terms[i] = std::norm(amp1_[i]);
  return pairwise_sum(terms);
}

void HybridState::rotate(std::size_t i, double c, double s) {
  const auto a0 = amp0_[i], a1 = amp1_[i];
  amp0_[i] = c * a0 - s * a1;
  amp1_[i] = s * a0 + c * a1;
}

void HybridState::reset_rotation_qubit() {
  for (std::size_t i = 0; i < size(); ++i) {
    const double r = std::sqrt(std::norm(amp0_[i]) + std::norm(amp1_[i]));
    const double phase = std::abs(amp0_[i]) > 0.0 ? std::arg(amp0_[i]) : std::arg(amp1_[i]);
    amp0_[i] = std::polar(r, phase);
    amp1_[i] = 0.0;
  }
}

std::vector<std::uint64_t>& HybridState::reg(const std::string& name) {
  auto it = regs_.find(name);
  if (it == regs_.end()) it = regs_.emplace(name, std::vector<std::uint64_t>(size(), 0)).first;
  return it->second;
}

const std::vector<std::uint64_t>* HybridState::find_reg(const std::string& name) const {
  const auto it = regs_.find(name);
  return it == regs_.end() ? nullptr : &it->second;
}

bool HybridState::is_set(const std::string& name) const {
  const auto* r = find_reg(name);
  return r && std::any_of(r->begin(), r->end(), [](std::uint64_t v) { return v != 0; });
}

std::vector<std::string> HybridState::nonzero_registers() const {
  std::vector<std::string> out;
  for (const auto& [name, r] : regs_)
    if (std::any_of(r.begin(), r.end(), [](std::uint64_t v) { return v != 0; })) out.push_back(name);
  return out;
}

void HybridState::release_zero_registers() {
  for (auto it = regs_.begin(); it != regs_.end();) {
    if (std::all_of(it->second.begin(), it->second.end(), [](std::uint64_t v) { return v == 0; }))
      it = regs_.erase(it);
    else
      ++it;
  }
}

SamplingOracle::SamplingOracle(const MarkovChain& chain, std::size_t cap)
    : paths_(std::make_shared<const std::vector<Path>>(enumerate_paths(chain, cap))), horizon_(chain.horizon()) {}

SamplingOracle::SamplingOracle(std::vector<Path> paths, int horizon)
    : paths_(std::make_shared<const std::vector<Path>>(std::move(paths))), horizon_(horizon) {
  if (paths_->empty()) throw InvalidArgument("sampling oracle needs at least one path");
}

std::vector<double> SamplingOracle::probabilities() const {
  std::vector<double> p;
  p.reserve(paths_->size());
  for (const auto& path : *paths_) p.push_back(path.probability);
  return p;
}

HybridState SamplingOracle::prepare(QueryLedger& ledger) const {
  HybridState s(paths_);
  std::vector<std::complex<double>> amp(paths_->size());
  for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = std::sqrt((*paths_)[i].probability);
  s.set_amplitudes(std::move(amp));
  ledger.add_state_prep();
  return s;
}

std::size_t SamplingOracle::measure(const HybridState& state, Rng& rng) const {
  std::vector<double> w(state.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::norm(state.amp0(i)) + std::norm(state.amp1(i));
  return rng.categorical(w);
}

FunctionOracle::FunctionOracle(std::string name, const std::vector<double>& values, FixedPointFormat format,
                               std::optional<QueryLedger> unit_cost)
    : name_(std::move(name)), format_(format) {
  check_format(format);
  if (unit_cost) {
    unit_cost_ = *unit_cost;
  } else {
    unit_cost_.add_function(name_);
  }
  std::string bad;
  int nbad = 0;
  values_.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || std::abs(values[i]) > format.max_value()) {
      if (nbad++ < 8) bad += (bad.empty() ? "" : ", ") + std::to_string(i) + " (" + std::to_string(values[i]) + ")";
      values_.emplace_back();
      continue;
    }
    values_.push_back(FixedPoint::encode(values[i], format));
  }
  if (nbad > 0)
    throw Overflow("function '" + name_ + "' not representable at " + std::to_string(nbad) + " basis states: " + bad);
}

void FunctionOracle::apply(HybridState& state, const std::string& out, QueryLedger& ledger) const {
  if (state.size() != values_.size()) throw InvalidArgument("oracle and state sizes differ");
  auto& r = state.reg(out);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] ^= values_[i].raw();
  ledger.add(unit_cost_);
}

void rotate_on_register(HybridState& state, const std::string& reg, const RotationInterval& in, QueryLedger& ledger) {
  const FixedPointFormat fmt = in.b.format();
  const std::int64_t lo = in.a.units(), hi = in.b.units();
  if (!(0 <= lo && lo < hi)) throw InvalidArgument("rotation interval needs 0 <= a < b");
  const auto* r = state.find_reg(reg);
  if (!r) throw MissingAnnotation("rotation register '" + reg + "' not computed");
  const double b = static_cast<double>(hi);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::int64_t h = FixedPoint::from_raw((*r)[i], fmt).units();
    const std::int64_t v = in.sign * (h - in.offset.units());
    if (v < lo || v > hi) continue;
    const double ratio = static_cast<double>(v) / b;
    state.rotate(i, std::sqrt(1.0 - ratio), std::sqrt(ratio));
  }
  ledger.add_rotation();
}

void controlled_rotation(HybridState& state, const FunctionCircuit& h, const RotationInterval& interval, QueryLedger& ledger) {
  const std::string scratch = "rotation_scratch";
  if (state.is_set(scratch)) throw DirtyAncilla("rotation scratch register in use");
  h.apply(state, scratch, ledger);
  rotate_on_register(state, scratch, interval, ledger);
  h.apply_inverse(state, scratch, ledger);
  state.release_zero_registers();
}

}  // namespace qlsm
