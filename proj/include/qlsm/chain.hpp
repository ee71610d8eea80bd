// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qlsm {

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 20;

// Finite set of d-dimensional points, stored row by row.
class StateGrid {
 public:
  StateGrid() = default;
  StateGrid(int dim, std::vector<double> coords);

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const { return coords_; }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
};

struct Path {
  std::vector<int> states;  // states[t-1] indexes E_t
  double probability = 0.0;
};

// Immutable finite Markov chain on steps t = 1..T with deterministic X_0.
class MarkovChain {
 public:
  // transitions[t-1] is P_t with shape |E_t| x |E_{t+1}|, t = 1..T-1.
  MarkovChain(std::vector<double> x0, std::vector<StateGrid> grids, std::vector<double> initial,
              std::vector<Eigen::MatrixXd> transitions);

  int dimension() const { return static_cast<int>(x0_.size()); }
  int horizon() const { return static_cast<int>(grids_.size()); }
  const std::vector<double>& x0() const { return x0_; }
  const StateGrid& grid(int t) const;
  std::size_t grid_size(int t) const { return grid(t).size(); }
  const std::vector<double>& initial_distribution() const { return initial_; }
  const Eigen::MatrixXd& transition(int t) const;

  // P[X_{t+1} = j | X_t = i]; t = 0 reads the initial distribution.
  double step_probability(int t, int i, int j) const;

  // Product of grid sizes (may exceed the cap; returned as double).
  double path_space_size() const;

 private:
  std::vector<double> x0_;
  std::vector<StateGrid> grids_;
  std::vector<double> initial_;
  std::vector<Eigen::MatrixXd> transitions_;
};

std::vector<Path> enumerate_paths(const MarkovChain& chain, std::size_t cap = kDefaultEnumerationCap);

Path sample_path(const MarkovChain& chain, std::uint64_t seed, std::uint64_t stream = 0);

std::vector<double> image_measure(const MarkovChain& chain, int t);

MarkovChain discretize_brownian(int d, int horizon, int grid_size, double radius);
MarkovChain discretize_gbm(int d, int horizon, int grid_size, double radius);

// Moment diagnostics for a discretized model, per step and coordinate 0.
struct MomentReport {
  std::vector<double> mean_error;      // |E[X_t] - exact|
  std::vector<double> variance_error;  // |Var[X_t] - exact|
  double max_error = 0.0;
};
MomentReport brownian_moment_report(const MarkovChain& chain);
MomentReport gbm_moment_report(const MarkovChain& chain);

// n-th moment of coordinate `coord` at step t under the chain's marginal.
double marginal_moment(const MarkovChain& chain, int t, int n, int coord = 0);

nlohmann::json chain_to_json(const MarkovChain& chain);
MarkovChain chain_from_json(const nlohmann::json& j);

}  // namespace qlsm
