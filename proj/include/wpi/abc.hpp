#pragma once

#include <cmath>
#include <vector>

#include "wpi/finite_kernel.hpp"
#include "wpi/monotone_rate.hpp"

namespace wpi {

/// Pseudo-marginal ABC chain: prior (1-q) q^(x-1) on x >= 1, likelihood a^(x-1), nearest
/// neighbour proposals, and a likelihood estimate that averages N Bernoulli(a^(x-1)) draws
/// scaled by 1/a^(x-1).  Joint states (x, k) carry the estimate w = k / (N a^(x-1)); k = 0 has
/// no stationary mass and is left out.
struct AbcChain {
  double a = 0.5;
  double q = 0.5;
  int N = 1;
  int max_x = 14;

  void validate() const {
    if (!(a > 0.0 && a < 1.0 && q > 0.0 && q < 1.0)) fail(ErrorKind::DomainError, "need a, q in (0,1)");
    if (N < 1 || max_x < 2) fail(ErrorKind::DomainError, "need N >= 1 and max_x >= 2");
  }
  int states() const { return max_x * N; }
  int index(int x, int k) const { return (x - 1) * N + (k - 1); }
  double likelihood(int x) const { return std::pow(a, x - 1); }
  /// (1 - aq)(aq)^(x-1), untruncated
  double posterior(int x) const { return (1.0 - a * q) * std::pow(a * q, x - 1); }
};

inline double binomial_pmf(int n, int k, double p) {
  double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// Joint kernel on (x, k), 1 <= x <= max_x, 1 <= k <= N.  Proposals leaving 1..max_x are
/// rejected, which keeps the truncated joint target invariant and reversible.
inline FiniteKernel abc_build(const AbcChain& c) {
  c.validate();
  const int n = c.states();
  Vector mu(n);
  for (int x = 1; x <= c.max_x; ++x) {
    double l = c.likelihood(x);
    for (int k = 1; k <= c.N; ++k)
      mu(c.index(x, k)) = c.posterior(x) * binomial_pmf(c.N, k, l) * k / (c.N * l);
  }
  mu /= mu.sum();
  Matrix P = Matrix::Zero(n, n);
  for (int x = 1; x <= c.max_x; ++x) {
    for (int k = 1; k <= c.N; ++k) {
      int from = c.index(x, k);
      double w = k / (c.N * c.likelihood(x));
      double moved = 0.0;
      for (int y : {x - 1, x + 1}) {
        if (y < 1 || y > c.max_x) continue;
        double ly = c.likelihood(y);
        double prior_ratio = c.posterior(y) / c.posterior(x);
        for (int kk = 1; kk <= c.N; ++kk) {
          double u = kk / (c.N * ly);
          double p = 0.5 * binomial_pmf(c.N, kk, ly) * std::min(1.0, prior_ratio * u / w);
          P(from, c.index(y, kk)) += p;
          moved += p;
        }
      }
      P(from, from) += 1.0 - moved;
    }
  }
  return FiniteKernel(std::move(P), mu);
}

/// Exponent log(aq)/log(a) of the polynomial lower bound on beta*.
inline double abc_floor_exponent(const AbcChain& c) {
  c.validate();
  return std::log(c.a * c.q) / std::log(c.a);
}

/// kappa(u) <= N a^-2 (2u)^theta, theta = log(a)/log(aq), for u < aq/4.
inline double abc_kappa_envelope(const AbcChain& c, double u) {
  double theta = std::log(c.a) / std::log(c.a * c.q);
  return c.N / (c.a * c.a) * std::pow(2.0 * u, theta);
}

/// Through 1/alpha*(r) <= 2 kappa(2r): alpha*(r) >= a^2/(2N) (4r)^-theta, whose inverse
/// gives beta*(s) >= C^(1/theta) s^(-1/theta) with C = a^2 4^-theta / (2N).  Valid for
/// 2r < aq/4, i.e. for s large enough.
inline MonotoneRate abc_beta_floor(const AbcChain& c) {
  c.validate();
  double theta = std::log(c.a) / std::log(c.a * c.q);
  double C = c.a * c.a * std::pow(4.0, -theta) / (2.0 * c.N);
  return MonotoneRate::power_law(std::pow(C, 1.0 / theta), 1.0 / theta);
}

}  // namespace wpi
