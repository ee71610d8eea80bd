// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/qmontecarlo.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "qlsm/error.hpp"

namespace qlsm {

namespace {

// Single-shot success probability of AE (Brassard et al.).
constexpr double kAeSuccess = 8.0 / (std::numbers::pi * std::numbers::pi);
const char* const kValueRegister = "qmc_value";

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

// Smallest power of two M with (c1 / M + c2 / M^2) <= eta.
int grover_size(double c1, double c2, double eta) {
  long long m = 1;
  while (c1 / static_cast<double>(m) + c2 / (static_cast<double>(m) * static_cast<double>(m)) > eta) {
    m *= 2;
    if (m > (1LL << 40)) throw ScheduleViolation("required Grover register exceeds 2^40");
  }
  return static_cast<int>(std::min<long long>(m, 1LL << 30));
}

}  // namespace

nlohmann::json EstimationReport::to_json() const {
  nlohmann::json j;
  j["estimate"] = estimate;
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  j["sigma"] = sigma;
  j["exact_mean"] = exact_mean;
  j["exact_variance"] = exact_variance;
  j["variance_exceeded"] = variance_exceeded;
  j["rounding_error"] = rounding_error;
  j["repetitions"] = repetitions;
  j["inner_repetitions"] = inner_repetitions;
  j["intervals"] = intervals;
  j["grover_sizes"] = grover_sizes;
  j["ledger"] = ledger.to_json();
  j["reference_cost"] = reference_cost;
  j["cost_ratio"] = cost_ratio;
  return j;
}

EstimationReport qmontecarlo(const SamplingOracle& sampler, const FunctionCircuit& h, double epsilon, double delta,
                             double sigma, Rng& rng, const QmcOptions& options) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("qmontecarlo needs epsilon in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("qmontecarlo needs delta in (0,1)");
  if (!(sigma > 0.0)) throw InvalidArgument("qmontecarlo needs sigma > 0");
  if (!(options.chebyshev_c > std::sqrt(3.0))) throw InvalidArgument("chebyshev_c must exceed sqrt(3)");
  const FixedPointFormat fmt = h.format();

  EstimationReport rep;
  rep.epsilon = epsilon;
  rep.delta = delta;
  rep.sigma = sigma;

  // One uncounted pass to read the annotated values for the exact oracle
  // and for the per-application cost of h.
  QueryLedger h_cost;
  QueryLedger scratch_ledger;
  HybridState state = sampler.prepare(scratch_ledger);
  h.apply(state, kValueRegister, h_cost);
  std::vector<std::int64_t> units(state.size());
  std::vector<double> prob(state.size());
  {
    const auto& r = state.reg(kValueRegister);
    for (std::size_t i = 0; i < state.size(); ++i) {
      units[i] = FixedPoint::from_raw(r[i], fmt).units();
      prob[i] = state.path(i).probability;
    }
  }
  const double ulp = fmt.ulp();
  {
    std::vector<double> t1(units.size()), t2(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) t1[i] = prob[i] * static_cast<double>(units[i]) * ulp;
    rep.exact_mean = pairwise_sum(t1);
    for (std::size_t i = 0; i < units.size(); ++i) {
      const double d = static_cast<double>(units[i]) * ulp - rep.exact_mean;
      t2[i] = prob[i] * d * d;
    }
    rep.exact_variance = pairwise_sum(t2);
  }
  rep.variance_exceeded = rep.exact_variance > sigma * sigma * (1.0 + 1e-12);
  if (rep.variance_exceeded && !options.allow_variance_excess) throw VarianceExceeded(rep.exact_variance, sigma);
  rep.rounding_error = 0.5 * ulp;
  if (rep.rounding_error > epsilon / 100.0)
    throw ScheduleViolation("fixed-point rounding exceeds epsilon/100; raise fraction_bits");

  // Cost of one state preparation A = U, V_h, R, V_h^dagger.
  QueryLedger prep_cost;
  prep_cost.add_state_prep();
  prep_cost.add(h_cost, 2);
  prep_cost.add_rotation();

  const double c = options.chebyshev_c;
  const double scale = std::sqrt(1.0 + c * c) * sigma;
  const double range = options.range_bound ? 2.0 * *options.range_bound : 2.0 * fmt.max_value();
  const int k_max = std::max(0, static_cast<int>(std::ceil(std::log2(range / scale))));
  const int n_int = k_max + 1;
  rep.intervals = n_int;
  rep.repetitions = static_cast<int>(std::ceil(options.median_constant * std::log(1.0 / delta)));
  // Base run fails with probability <= 1/3: 1/c^2 from the shift, the rest
  // spread over 2 n_int interval medians.
  const double f_in = (1.0 / 3.0 - 1.0 / (c * c)) / (2.0 * n_int);
  const double gap = kAeSuccess - 0.5;
  rep.inner_repetitions = std::max(1, static_cast<int>(std::ceil(std::log(1.0 / f_in) / (2.0 * gap * gap))));
  if (rep.inner_repetitions % 2 == 0) ++rep.inner_repetitions;

  // Interval endpoints in fixed point: I_0 = [0, s], I_j = (2^{j-1}s, 2^j s].
  std::vector<FixedPoint> lo(static_cast<std::size_t>(n_int)), hi(static_cast<std::size_t>(n_int));
  const double rmax = fmt.max_value();
  for (int j = 0; j < n_int; ++j) {
    hi[static_cast<std::size_t>(j)] = FixedPoint::encode(std::min(std::ldexp(scale, j), rmax), fmt);
    lo[static_cast<std::size_t>(j)] =
        j == 0 ? FixedPoint::encode(0.0, fmt) : FixedPoint::from_units(hi[static_cast<std::size_t>(j - 1)].units() + 1, fmt);
  }
  // Error budget per interval, in units of s.
  const double eta = epsilon / (2.0 * scale * n_int);
  rep.grover_sizes.resize(static_cast<std::size_t>(n_int));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int j = 0; j < n_int; ++j) {
    const double c1 = j == 0 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
    rep.grover_sizes[static_cast<std::size_t>(j)] = grover_size(c1, std::ldexp(pi2, j), eta);
  }

  // Good amplitudes depend on the shift only; cache per shift value.
  std::map<std::int64_t, std::vector<double>> amp_cache;
  auto amplitudes = [&](std::int64_t shift) -> const std::vector<double>& {
    auto it = amp_cache.find(shift);
    if (it != amp_cache.end()) return it->second;
    std::vector<double> a;
    QueryLedger none;
    for (int sign : {1, -1})
      for (int j = 0; j < n_int; ++j) {
        state.reset_rotation_qubit();
        RotationInterval in{lo[static_cast<std::size_t>(j)], hi[static_cast<std::size_t>(j)], sign,
                            FixedPoint::from_units(shift, fmt)};
        rotate_on_register(state, kValueRegister, in, none);
        a.push_back(state.good_probability());
      }
    state.reset_rotation_qubit();
    return amp_cache.emplace(shift, std::move(a)).first->second;
  };

  std::vector<double> base(static_cast<std::size_t>(rep.repetitions));
  std::vector<double> inner(static_cast<std::size_t>(rep.inner_repetitions));
  for (int r = 0; r < rep.repetitions; ++r) {
    // Classical shift: measure U|0>, then read h.
    rep.ledger.add_state_prep();
    rep.ledger.add(h_cost);
    const std::size_t x = sampler.measure(state, rng);
    const std::int64_t shift = units[x];
    const auto& a = amplitudes(shift);
    double part[2] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s)
      for (int j = 0; j < n_int; ++j) {
        const double aj = a[static_cast<std::size_t>(s * n_int + j)];
        const int m = rep.grover_sizes[static_cast<std::size_t>(j)];
        for (auto& v : inner) v = amplitude_estimation(aj, m, prep_cost, rep.ledger, rng).estimate;
        part[s] += median(inner) * hi[static_cast<std::size_t>(j)].decode();
      }
    base[static_cast<std::size_t>(r)] = static_cast<double>(shift) * ulp + part[0] - part[1];
  }
  rep.estimate = median(base);

  const double ratio = sigma / epsilon;
  const double lg = std::max(1.0, std::log2(ratio));
  const double polylog = std::pow(lg, 1.5) * std::max(1.0, std::log2(lg));
  rep.reference_cost = ratio * std::log(1.0 / delta) * polylog;
  rep.cost_ratio = static_cast<double>(rep.ledger.grover()) / rep.reference_cost;
  return rep;
}

}  // namespace qlsm
