// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/chain.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

#include "qlsm/error.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

namespace {

constexpr double kRowTol = 1e-12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void check_row(std::span<const double> row, const std::string& what) {
  double s = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) throw InvalidArgument(what + ": negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > kRowTol) throw InvalidArgument(what + ": row sums to " + std::to_string(s));
}

// One-coordinate grid at step t.
std::vector<double> axis_grid(int t, int n, double radius) {
  if (n == 1) return {0.0};
  const double half = radius * std::sqrt(static_cast<double>(t));
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(j)] = -half + 2.0 * half * j / (n - 1);
  return g;
}

// Mass of x + N(0,1) binned to the nearest point of `to`, then renormalized.
std::vector<double> binned_row(double x, const std::vector<double>& to) {
  const std::size_t n = to.size();
  std::vector<double> row(n, 0.0);
  if (n == 1) {
    row[0] = 1.0;
    return row;
  }
  const double h = to[1] - to[0];
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = to[j] - 0.5 * h - x;
    const double hi = to[j] + 0.5 * h - x;
    // Upper tail form keeps precision for cells far right of x.
    row[j] = lo > 0.0 ? normal_cdf(-lo) - normal_cdf(-hi) : normal_cdf(hi) - normal_cdf(lo);
    total += row[j];
  }
  for (double& p : row) p /= total;
  return row;
}

Eigen::MatrixXd kron_power(const Eigen::MatrixXd& a, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (int c = 0; c < d; ++c) {
    Eigen::MatrixXd next(out.rows() * a.rows(), out.cols() * a.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        next.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = out(i, j) * a;
    out = std::move(next);
  }
  return out;
}

std::vector<double> kron_power(const std::vector<double>& v, int d) {
  std::vector<double> out{1.0};
  for (int c = 0; c < d; ++c) {
    std::vector<double> next;
    next.reserve(out.size() * v.size());
    for (double a : out)
      for (double b : v) next.push_back(a * b);
    out = std::move(next);
  }
  return out;
}

// Tensor grid, first coordinate most significant.
StateGrid tensor_grid(const std::vector<double>& axis, int d) {
  std::size_t count = 1;
  for (int c = 0; c < d; ++c) count *= axis.size();
  std::vector<double> coords;
  coords.reserve(count * static_cast<std::size_t>(d));
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    std::vector<double> pt(static_cast<std::size_t>(d));
    for (int c = d - 1; c >= 0; --c) {
      pt[static_cast<std::size_t>(c)] = axis[rem % axis.size()];
      rem /= axis.size();
    }
    coords.insert(coords.end(), pt.begin(), pt.end());
  }
  return StateGrid(d, std::move(coords));
}

struct AxisChain {
  std::vector<std::vector<double>> grids;
  std::vector<double> initial;
  std::vector<Eigen::MatrixXd> transitions;
};

AxisChain brownian_axis(int horizon, int n, double radius) {
  AxisChain a;
  for (int t = 1; t <= horizon; ++t) a.grids.push_back(axis_grid(t, n, radius));
  a.initial = binned_row(0.0, a.grids[0]);
  for (int t = 1; t < horizon; ++t) {
    const auto& from = a.grids[static_cast<std::size_t>(t - 1)];
    const auto& to = a.grids[static_cast<std::size_t>(t)];
    Eigen::MatrixXd p(static_cast<Eigen::Index>(from.size()), static_cast<Eigen::Index>(to.size()));
    for (std::size_t i = 0; i < from.size(); ++i) {
      const auto row = binned_row(from[i], to);
      for (std::size_t j = 0; j < to.size(); ++j) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    a.transitions.push_back(std::move(p));
  }
  return a;
}

void check_model_args(int d, int horizon, int grid_size, double radius, int min_grid) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  if (horizon < 1) throw InvalidArgument("horizon must be positive");
  if (grid_size < min_grid) throw InvalidArgument("grid_size must be at least " + std::to_string(min_grid));
  if (!(radius > 0.0)) throw InvalidArgument("grid radius must be positive");
}

MarkovChain assemble(const AxisChain& a, int d, const std::vector<std::vector<double>>& axis_values,
                     std::vector<double> x0) {
  std::vector<StateGrid> grids;
  for (const auto& g : axis_values) grids.push_back(tensor_grid(g, d));
  std::vector<Eigen::MatrixXd> trans;
  for (const auto& p : a.transitions) trans.push_back(kron_power(p, d));
  return MarkovChain(std::move(x0), std::move(grids), kron_power(a.initial, d), std::move(trans));
}

}  // namespace

StateGrid::StateGrid(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim_ < 1) throw InvalidArgument("grid dimension must be positive");
  if (coords_.size() % static_cast<std::size_t>(dim_) != 0) throw InvalidArgument("grid coordinates not a multiple of dimension");
}

MarkovChain::MarkovChain(std::vector<double> x0, std::vector<StateGrid> grids, std::vector<double> initial,
                         std::vector<Eigen::MatrixXd> transitions)
    : x0_(std::move(x0)), grids_(std::move(grids)), initial_(std::move(initial)), transitions_(std::move(transitions)) {
  if (x0_.empty()) throw InvalidArgument("dimension must be positive");
  if (grids_.empty()) throw InvalidArgument("horizon must be positive");
  const int d = dimension();
  for (std::size_t t = 0; t < grids_.size(); ++t) {
    if (grids_[t].dim() != d) throw InvalidArgument("grid dimension mismatch at t=" + std::to_string(t + 1));
    if (grids_[t].size() < 1) throw InvalidArgument("empty grid at t=" + std::to_string(t + 1));
  }
  if (initial_.size() != grids_[0].size()) throw InvalidArgument("initial distribution size mismatch");
  check_row(initial_, "initial distribution");
  if (transitions_.size() + 1 != grids_.size()) throw InvalidArgument("need T-1 transition matrices");
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    const auto& p = transitions_[t];
    if (static_cast<std::size_t>(p.rows()) != grids_[t].size() || static_cast<std::size_t>(p.cols()) != grids_[t + 1].size())
      throw InvalidArgument("transition shape mismatch at t=" + std::to_string(t + 1));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(p.cols()));
      for (Eigen::Index j = 0; j < p.cols(); ++j) row[static_cast<std::size_t>(j)] = p(i, j);
      check_row(row, "transition t=" + std::to_string(t + 1));
    }
  }
}

const StateGrid& MarkovChain::grid(int t) const {
  if (t < 1 || t > horizon()) throw InvalidArgument("step " + std::to_string(t) + " out of range");
  return grids_[static_cast<std::size_t>(t - 1)];
}

const Eigen::MatrixXd& MarkovChain::transition(int t) const {
  if (t < 1 || t >= horizon()) throw InvalidArgument("transition " + std::to_string(t) + " out of range");
  return transitions_[static_cast<std::size_t>(t - 1)];
}

double MarkovChain::step_probability(int t, int i, int j) const {
  if (t == 0) return initial_[static_cast<std::size_t>(j)];
  return transitions_[static_cast<std::size_t>(t - 1)](i, j);
}

double MarkovChain::path_space_size() const {
  double n = 1.0;
  for (const auto& g : grids_) n *= static_cast<double>(g.size());
  return n;
}

std::vector<Path> enumerate_paths(const MarkovChain& chain, std::size_t cap) {
  const double size = chain.path_space_size();
  if (size > static_cast<double>(cap)) throw CapExceeded(size, static_cast<double>(cap));
  const int horizon = chain.horizon();
  std::vector<Path> out;
  Path cur;
  cur.states.resize(static_cast<std::size_t>(horizon));
  // Depth-first over nonzero transitions.
  auto rec = [&](auto&& self, int t, int prev, double prob) -> void {
    if (t > horizon) {
      cur.probability = prob;
      out.push_back(cur);
      return;
    }
    const auto n = static_cast<int>(chain.grid_size(t));
    for (int j = 0; j < n; ++j) {
      const double p = chain.step_probability(t - 1, prev, j);
      if (p <= 0.0) continue;
      cur.states[static_cast<std::size_t>(t - 1)] = j;
      self(self, t + 1, j, prob * p);
    }
  };
  rec(rec, 1, 0, 1.0);
  return out;
}

Path sample_path(const MarkovChain& chain, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  Path path;
  path.states.resize(static_cast<std::size_t>(chain.horizon()));
  path.probability = 1.0;
  int prev = 0;
  for (int t = 1; t <= chain.horizon(); ++t) {
    int j;
    if (t == 1) {
      j = static_cast<int>(rng.categorical(chain.initial_distribution()));
    } else {
      const auto& p = chain.transition(t - 1);
      std::vector<double> row(static_cast<std::size_t>(p.cols()));
      for (Eigen::Index c = 0; c < p.cols(); ++c) row[static_cast<std::size_t>(c)] = p(prev, c);
      j = static_cast<int>(rng.categorical(row));
    }
    path.probability *= chain.step_probability(t - 1, prev, j);
    path.states[static_cast<std::size_t>(t - 1)] = j;
    prev = j;
  }
  return path;
}

std::vector<double> image_measure(const MarkovChain& chain, int t) {
  if (t < 1 || t > chain.horizon()) throw InvalidArgument("step " + std::to_string(t) + " out of range");
  Eigen::RowVectorXd mu = Eigen::Map<const Eigen::RowVectorXd>(chain.initial_distribution().data(),
                                                               static_cast<Eigen::Index>(chain.initial_distribution().size()));
  for (int s = 1; s < t; ++s) mu = mu * chain.transition(s);
  return {mu.data(), mu.data() + mu.size()};
}

MarkovChain discretize_brownian(int d, int horizon, int grid_size, double radius) {
  check_model_args(d, horizon, grid_size, radius, 2);
  const AxisChain a = brownian_axis(horizon, grid_size, radius);
  return assemble(a, d, a.grids, std::vector<double>(static_cast<std::size_t>(d), 0.0));
}

MarkovChain discretize_gbm(int d, int horizon, int grid_size, double radius) {
  check_model_args(d, horizon, grid_size, radius, 1);
  const AxisChain a = brownian_axis(horizon, grid_size, radius);
  std::vector<std::vector<double>> values;
  for (int t = 1; t <= horizon; ++t) {
    std::vector<double> g;
    // A one-point grid collapses onto the mean E[S_t] = 1.
    for (double w : a.grids[static_cast<std::size_t>(t - 1)])
      g.push_back(grid_size == 1 ? 1.0 : std::exp(w - 0.5 * t));
    values.push_back(std::move(g));
  }
  return assemble(a, d, values, std::vector<double>(static_cast<std::size_t>(d), 1.0));
}

double marginal_moment(const MarkovChain& chain, int t, int n, int coord) {
  const auto rho = image_measure(chain, t);
  const auto& g = chain.grid(t);
  std::vector<double> terms(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) terms[i] = rho[i] * std::pow(g.point(i)[static_cast<std::size_t>(coord)], n);
  return pairwise_sum(terms);
}

namespace {

MomentReport moment_report(const MarkovChain& chain, double (*mean)(int), double (*var)(int)) {
  MomentReport r;
  for (int t = 1; t <= chain.horizon(); ++t) {
    const double m1 = marginal_moment(chain, t, 1);
    const double m2 = marginal_moment(chain, t, 2);
    r.mean_error.push_back(std::abs(m1 - mean(t)));
    r.variance_error.push_back(std::abs(m2 - m1 * m1 - var(t)));
    r.max_error = std::max({r.max_error, r.mean_error.back(), r.variance_error.back()});
  }
  return r;
}

}  // namespace

MomentReport brownian_moment_report(const MarkovChain& chain) {
  return moment_report(
      chain, [](int) { return 0.0; }, [](int t) { return static_cast<double>(t); });
}

MomentReport gbm_moment_report(const MarkovChain& chain) {
  return moment_report(
      chain, [](int) { return 1.0; }, [](int t) { return std::expm1(static_cast<double>(t)); });
}

nlohmann::json chain_to_json(const MarkovChain& chain) {
  nlohmann::json j;
  j["dimension"] = chain.dimension();
  j["horizon"] = chain.horizon();
  j["initial_state"] = chain.x0();
  nlohmann::json grids = nlohmann::json::array();
  for (int t = 1; t <= chain.horizon(); ++t) {
    nlohmann::json pts = nlohmann::json::array();
    const auto& g = chain.grid(t);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto p = g.point(i);
      pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    grids.push_back(std::move(pts));
  }
  j["grids"] = std::move(grids);
  j["initial_distribution"] = chain.initial_distribution();
  nlohmann::json trans = nlohmann::json::array();
  for (int t = 1; t < chain.horizon(); ++t) {
    const auto& p = chain.transition(t);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(p.cols()));
      for (Eigen::Index c = 0; c < p.cols(); ++c) row[static_cast<std::size_t>(c)] = p(r, c);
      rows.push_back(std::move(row));
    }
    trans.push_back(std::move(rows));
  }
  j["transitions"] = std::move(trans);
  return j;
}

MarkovChain chain_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("dimension").get<int>();
    const int horizon = j.at("horizon").get<int>();
    std::vector<double> x0 = j.contains("initial_state") ? j.at("initial_state").get<std::vector<double>>()
                                                         : std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 0.0);
    if (static_cast<int>(x0.size()) != d) throw InvalidArgument("initial_state size mismatch");
    std::vector<StateGrid> grids;
    for (const auto& pts : j.at("grids")) {
      std::vector<double> coords;
      for (const auto& p : pts) {
        const auto v = p.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != d) throw InvalidArgument("grid point dimension mismatch");
        coords.insert(coords.end(), v.begin(), v.end());
      }
      grids.emplace_back(d, std::move(coords));
    }
    if (static_cast<int>(grids.size()) != horizon) throw InvalidArgument("grid count does not match horizon");
    std::vector<Eigen::MatrixXd> trans;
    for (const auto& rows : j.at("transitions")) {
      const auto r = static_cast<Eigen::Index>(rows.size());
      const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
      Eigen::MatrixXd p(r, c);
      for (Eigen::Index a = 0; a < r; ++a) {
        const auto row = rows.at(static_cast<std::size_t>(a)).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != c) throw InvalidArgument("ragged transition matrix");
        for (Eigen::Index b = 0; b < c; ++b) p(a, b) = row[static_cast<std::size_t>(b)];
      }
      trans.push_back(std::move(p));
    }
    return MarkovChain(std::move(x0), std::move(grids), j.at("initial_distribution").get<std::vector<double>>(),
                       std::move(trans));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("chain json: ") + e.what());
  }
}

}  // namespace qlsm
