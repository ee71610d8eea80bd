// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/basis.hpp"

#include <cmath>
#include <numbers>

#include "qlsm/error.hpp"
#include "qlsm/numeric.hpp"

namespace qlsm {

namespace {

// Mixed-radix enumeration of {0..q}^d, first coordinate most significant.
std::vector<std::vector<int>> tensor_indices(int d, int q, bool total_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> k(static_cast<std::size_t>(d), 0);
  while (true) {
    int sum = 0;
    for (int v : k) sum += v;
    if (!total_degree || sum <= q) out.push_back(k);
    int c = d - 1;
    while (c >= 0 && k[static_cast<std::size_t>(c)] == q) k[static_cast<std::size_t>(c--)] = 0;
    if (c < 0) break;
    ++k[static_cast<std::size_t>(c)];
  }
  return out;
}

void check_dq(int d, int q) {
  if (d < 1) throw InvalidArgument("basis dimension must be positive");
  if (q < 0) throw InvalidArgument("basis degree must be nonnegative");
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

// sum_{j<=n} H_j(x)^2 / (2^j j!)
double hermite_square_sum(int n, double x) {
  double s = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double h = hermite(j, x);
    s += h * h * std::exp(-(j * std::numbers::ln2 + log_factorial(j)));
  }
  return s;
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::kGenericPolynomial:
      return "generic-polynomial";
    case BasisKind::kHermiteTruncated:
      return "hermite-truncated";
    case BasisKind::kGbmMonomialTruncated:
      return "gbm-monomial-truncated";
    case BasisKind::kCustom:
      return "custom";
  }
  return "unknown";
}

double hermite(int k, double x) {
  if (k < 0) throw InvalidArgument("hermite degree must be nonnegative");
  double h0 = 1.0;
  if (k == 0) return h0;
  double h1 = 2.0 * x;
  for (int n = 1; n < k; ++n) {
    const double h2 = 2.0 * x * h1 - 2.0 * n * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

Basis Basis::polynomial(int d, int q) {
  check_dq(d, q);
  Basis b;
  b.kind_ = BasisKind::kGenericPolynomial;
  b.name_ = "polynomial";
  b.d_ = d;
  b.q_ = q;
  b.indices_ = tensor_indices(d, q, true);
  b.m_ = static_cast<int>(b.indices_.size());
  return b;
}

Basis Basis::hermite(int d, int q, double lambda) {
  check_dq(d, q);
  if (!(lambda > 0.0)) throw InvalidArgument("cube radius must be positive");
  Basis b;
  b.kind_ = BasisKind::kHermiteTruncated;
  b.name_ = "hermite";
  b.d_ = d;
  b.q_ = q;
  b.lambda_ = lambda;
  b.indices_ = tensor_indices(d, q, true);
  b.m_ = static_cast<int>(b.indices_.size());
  for (int k = 0; k <= q; ++k) b.log_norm_.push_back(-0.5 * (log_factorial(k) + k * std::numbers::ln2));
  return b;
}

Basis Basis::gbm(int d, int q, double lambda) {
  check_dq(d, q);
  if (!(lambda > 0.0)) throw InvalidArgument("cube radius must be positive");
  Basis b;
  b.kind_ = BasisKind::kGbmMonomialTruncated;
  b.name_ = "gbm";
  b.d_ = d;
  b.q_ = q;
  b.lambda_ = lambda;
  b.indices_ = tensor_indices(d, q, false);
  b.m_ = static_cast<int>(b.indices_.size());
  return b;
}

Basis Basis::custom(std::string name, int d, int m, BasisFn fn) {
  if (d < 1 || m < 1) throw InvalidArgument("custom basis needs positive dimension and size");
  if (!fn) throw InvalidArgument("custom basis needs an evaluator");
  Basis b;
  b.kind_ = BasisKind::kCustom;
  b.name_ = std::move(name);
  b.d_ = d;
  b.m_ = m;
  b.custom_ = std::move(fn);
  return b;
}

bool Basis::in_cube(std::span<const double> x) const {
  for (double v : x)
    if (std::abs(v) > lambda_) return false;
  return true;
}

double Basis::value(int t, int k, std::span<const double> x) const {
  if (k < 0 || k >= m_) throw InvalidArgument("basis index out of range");
  std::vector<double> all(static_cast<std::size_t>(m_));
  values(t, x, all);
  return all[static_cast<std::size_t>(k)];
}

void Basis::values(int t, std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != d_) throw InvalidArgument("basis point dimension mismatch");
  if (static_cast<int>(out.size()) != m_) throw InvalidArgument("basis output size mismatch");
  if (t < 1) throw InvalidArgument("basis step must be >= 1");
  if (kind_ == BasisKind::kCustom) {
    for (int k = 0; k < m_; ++k) out[static_cast<std::size_t>(k)] = custom_(t, k, x);
    return;
  }
  if (!in_cube(x)) {
    for (double& v : out) v = 0.0;
    return;
  }
  // Per-coordinate factors for degrees 0..q, then products over multi-indices.
  const auto q1 = static_cast<std::size_t>(q_ + 1);
  std::vector<double> f(static_cast<std::size_t>(d_) * q1);
  for (int c = 0; c < d_; ++c) {
    double* fc = f.data() + static_cast<std::size_t>(c) * q1;
    const double xc = x[static_cast<std::size_t>(c)];
    switch (kind_) {
      case BasisKind::kGenericPolynomial:
        fc[0] = 1.0;
        for (std::size_t k = 1; k < q1; ++k) fc[k] = fc[k - 1] * xc;
        break;
      case BasisKind::kHermiteTruncated: {
        const double y = xc / std::sqrt(2.0 * t);
        double prev = 0.0, cur = 1.0;
        for (std::size_t k = 0; k < q1; ++k) {
          fc[k] = cur * std::exp(log_norm_[k]);
          const double next = 2.0 * y * cur - 2.0 * static_cast<double>(k) * prev;
          prev = cur;
          cur = next;
        }
        break;
      }
      case BasisKind::kGbmMonomialTruncated: {
        double p = 1.0;
        for (std::size_t k = 0; k < q1; ++k) {
          const double kd = static_cast<double>(k);
          fc[k] = p * std::exp(-kd * (kd - 1.0) * t / 2.0);
          p *= xc;
        }
        break;
      }
      case BasisKind::kCustom:
        break;
    }
  }
  for (int k = 0; k < m_; ++k) {
    double v = 1.0;
    const auto& idx = indices_[static_cast<std::size_t>(k)];
    for (int c = 0; c < d_; ++c) v *= f[static_cast<std::size_t>(c) * q1 + static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])];
    out[static_cast<std::size_t>(k)] = v;
  }
}

BasisTable::BasisTable(const Basis& basis, const MarkovChain& chain)
    : m_(basis.size()), ones_(static_cast<std::size_t>(basis.size()), 1.0) {
  if (basis.dimension() != chain.dimension()) throw InvalidArgument("basis and chain dimensions differ");
  for (int t = 1; t < chain.horizon(); ++t) {
    const auto& g = chain.grid(t);
    std::vector<double> v(g.size() * static_cast<std::size_t>(m_));
    for (std::size_t i = 0; i < g.size(); ++i)
      basis.values(t, g.point(i), std::span<double>(v.data() + i * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)));
    values_.push_back(std::move(v));
  }
}

std::span<const double> BasisTable::row(int t, int i) const {
  if (t == 0) return ones_;
  const auto& v = values_.at(static_cast<std::size_t>(t - 1));
  return {v.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
}

BasisNorms basis_norms(const Basis& basis, const MarkovChain& chain) {
  BasisNorms n;
  const BasisTable table(basis, chain);
  const int m = basis.size();
  for (int t = 1; t < chain.horizon(); ++t) {
    const auto rho = image_measure(chain, t);
    for (int k = 0; k < m; ++k) {
      std::vector<double> sq(rho.size());
      for (std::size_t i = 0; i < rho.size(); ++i) {
        const double e = table.row(t, static_cast<int>(i))[static_cast<std::size_t>(k)];
        sq[i] = rho[i] * e * e;
        if (rho[i] > 0.0) n.sup = std::max(n.sup, std::abs(e));
      }
      n.l2 = std::max(n.l2, std::sqrt(pairwise_sum(sq)));
    }
  }
  return n;
}

GramResult gram_matrix(const Basis& basis, const MarkovChain& chain, int t, std::size_t cap, std::uint64_t seed,
                       std::size_t mc_samples) {
  if (t < 1 || t > chain.horizon()) throw InvalidArgument("gram step out of range");
  const int m = basis.size();
  const auto& g = chain.grid(t);
  GramResult r;
  std::vector<double> e(static_cast<std::size_t>(m));
  if (g.size() <= cap) {
    const auto rho = image_measure(chain, t);
    r.mode = GramMode::kExact;
    r.matrix = pairwise_reduce(rho.size(), m, m, [&](std::size_t i, Eigen::MatrixXd& acc) {
      if (rho[i] == 0.0) return;
      basis.values(t, g.point(i), e);
      const Eigen::Map<const Eigen::VectorXd> v(e.data(), m);
      acc.noalias() += rho[i] * v * v.transpose();
    });
    return r;
  }
  r.mode = GramMode::kMonteCarlo;
  r.matrix = pairwise_reduce(mc_samples, m, m, [&](std::size_t n, Eigen::MatrixXd& acc) {
    const Path p = sample_path(chain, seed, n);
    basis.values(t, g.point(static_cast<std::size_t>(p.states[static_cast<std::size_t>(t - 1)])), e);
    const Eigen::Map<const Eigen::VectorXd> v(e.data(), m);
    acc.noalias() += v * v.transpose();
  });
  r.matrix /= static_cast<double>(mc_samples);
  return r;
}

std::optional<Eigen::MatrixXd> closed_form_gram(const Basis& basis, double t) {
  const int m = basis.size();
  switch (basis.kind()) {
    case BasisKind::kHermiteTruncated:
      return Eigen::MatrixXd::Identity(m, m);
    case BasisKind::kGbmMonomialTruncated: {
      Eigen::MatrixXd a(m, m);
      const auto& idx = basis.multi_indices();
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
          double s = 0.0;
          for (int i = 0; i < basis.dimension(); ++i)
            s += idx[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] * idx[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
          a(r, c) = std::exp(s * t);
        }
      return a;
    }
    default:
      return std::nullopt;
  }
}

TailBound hermite_tail_bound(int k, int l, double lambda) {
  if (l > k) throw InvalidArgument("hermite_tail_bound needs l <= k");
  if (l < 0) throw InvalidArgument("hermite degree must be nonnegative");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  TailBound b;
  const double gauss = std::exp(-lambda * lambda);
  if (k == l) {
    const double scale = std::exp(k * std::numbers::ln2 + log_factorial(k));
    b.exact_form = scale * (0.5 * std::sqrt(std::numbers::pi) * std::erfc(lambda) + gauss * hermite_square_sum(k, lambda));
  } else {
    const double log_scale = 0.5 * ((k + l - 1) * std::numbers::ln2 + log_factorial(l) + log_factorial(k - 1));
    b.exact_form =
        std::exp(log_scale) * gauss * std::sqrt(hermite_square_sum(l, lambda) * hermite_square_sum(k - 1, lambda));
  }
  const double log_simplified = (2.0 + 0.5 * (k + l)) * std::numbers::ln2 + 0.5 * (log_factorial(k + 1) + log_factorial(l + 1)) +
                                (std::sqrt(2.0 * (k + 1)) + std::sqrt(2.0 * (l + 1))) * lambda - lambda * lambda;
  b.simplified = std::exp(log_simplified);
  return b;
}

double gbm_tail_bound(int k, double lambda, double t) {
  if (!(lambda > 0.0) || !(t > 0.0) || k < 0) throw InvalidArgument("gbm_tail_bound needs lambda > 0, t > 0, k >= 0");
  const double y = std::log(lambda) - t * (k - 0.5);
  return 0.5 * std::exp(0.5 * t * k * (k - 1) - y * y / (2.0 * t));
}

bool gbm_tail_bound_applies(int k, double lambda, double t) { return std::log(lambda) >= t * (k - 0.5); }

SigmaMinBound vandermonde_sigma_min_bound(int q, int d, double t) {
  if (q < 1 || d < 1 || !(t > 0.0)) throw InvalidArgument("vandermonde bound needs q >= 1, d >= 1, t > 0");
  SigmaMinBound b;
  const double em1 = std::expm1(t);
  const double log_sharp = 2.0 * std::numbers::e * d / (em1 * em1) + d * std::log(q) + d * std::log(q + 1.0) +
                           q * d * (t - std::log(em1));
  b.sharp = std::exp(log_sharp);
  b.simplified = std::exp(3.0 * q * d + 2.0 * d * std::log(q));
  b.ordered = b.sharp <= b.simplified;
  return b;
}

double jackson_smooth_bound(int q, int n, double c) {
  if (n < 1 || q <= n) throw InvalidArgument("smooth Jackson bound needs q > n >= 1");
  return c * std::pow(static_cast<double>(q), -n);
}

double jackson_lipschitz_bound(int q, double lambda, double c_lipschitz, int d) {
  if (!(c_lipschitz > 0.0) || d < 1 || q < 0) throw InvalidArgument("Lipschitz Jackson bound needs C_L > 0, d >= 1");
  return 88.0 * lambda * c_lipschitz * d / (d + q);
}

double hermite_truncation_gram_bound(const Basis& basis, double t) {
  if (basis.kind() != BasisKind::kHermiteTruncated) throw InvalidArgument("Hermite basis required");
  if (std::isinf(basis.lambda())) return 0.0;
  const double y = basis.lambda() / std::sqrt(2.0 * t);
  const int q = basis.degree();
  // s(k,l): bound on the two-sided tail mass of e_k e_l for one coordinate.
  std::vector<double> s(static_cast<std::size_t>((q + 1) * (q + 1)));
  for (int k = 0; k <= q; ++k)
    for (int l = 0; l <= q; ++l) {
      const int hi = std::max(k, l), lo = std::min(k, l);
      const double norm = std::exp(-0.5 * (log_factorial(k) + log_factorial(l) + (k + l) * std::numbers::ln2)) /
                          std::sqrt(std::numbers::pi);
      const double parity = (k + l) % 2 == 0 ? 2.0 : 0.0;
      s[static_cast<std::size_t>(k * (q + 1) + l)] = parity * norm * hermite_tail_bound(hi, lo, y).exact_form;
    }
  const auto& idx = basis.multi_indices();
  double frob = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) {
      double dev;
      if (a == b) {
        dev = 0.0;
        for (int c = 0; c < basis.dimension(); ++c) {
          const int k = idx[a][static_cast<std::size_t>(c)];
          dev += s[static_cast<std::size_t>(k * (q + 1) + k)];
        }
      } else {
        dev = 1.0;
        for (int c = 0; c < basis.dimension(); ++c) {
          const int k = idx[a][static_cast<std::size_t>(c)], l = idx[b][static_cast<std::size_t>(c)];
          if (k != l) dev *= s[static_cast<std::size_t>(k * (q + 1) + l)];
        }
      }
      frob += dev * dev;
    }
  return std::sqrt(frob);
}

}  // namespace qlsm
