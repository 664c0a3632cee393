#pragma once

// Independent oracles for the unit tests: brute force over grids and subsets, written without
// the library's closed forms.

#include <cmath>
#include <random>
#include <vector>

#include <catch_amalgamated.hpp>

#include "wpi/acceptance.hpp"

namespace oracle {

using wpi::Matrix;
using wpi::Vector;

/// sup_{u >= 0} (u v - K(u)) over a log grid in u, K(u) = u beta(1/u).
inline double conjugate_by_grid(const std::function<double(double)>& beta, double v) {
  double best = 0.0;
  for (double u : wpi::log_grid(1e-8, 1e6, 200000)) best = std::max(best, u * v - u * beta(1.0 / u));
  return best;
}

/// inf{y > 0 : f(y) <= x} by bisection on [lo, hi] for a nonincreasing f.
inline double inverse_by_bisection(const std::function<double(double)>& f, double x, double lo = 1e-12,
                                   double hi = 1e12) {
  if (f(lo) <= x) return 0.0;
  if (!(f(hi) <= x)) return wpi::kInf;
  for (int i = 0; i < 400; ++i) {
    double mid = std::sqrt(lo * hi);
    (f(mid) <= x ? hi : lo) = mid;
  }
  return hi;
}

/// gamma(n) from F(x) = int_x^a dv / K*(v) by midpoint quadrature in log v and bisection.
inline double gamma_by_quadrature(const std::function<double(double)>& kstar, double a, double n) {
  auto F = [&](double x) {
    const int m = 20000;
    double s = 0.0, lx = std::log(x), la = std::log(a);
    for (int i = 0; i < m; ++i) {
      double v = std::exp(lx + (la - lx) * (i + 0.5) / m);
      s += v / kstar(v);
    }
    return s * (la - lx) / m;
  };
  double lo = 1e-12, hi = a;
  for (int i = 0; i < 100; ++i) {
    double mid = std::sqrt(lo * hi);
    (F(mid) > n ? lo : hi) = mid;
  }
  return hi;
}

/// kappa(u) by visiting every proper subset.
inline double kappa_brute(const wpi::FiniteKernel& k, double u) {
  const int n = k.size();
  double best = wpi::kInf;
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t(1) << n); ++mask) {
    double mA = 0.0, flow = 0.0;
    for (int x = 0; x < n; ++x)
      if (mask >> x & 1) mA += k.mu()(x);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if ((mask >> x & 1) && !(mask >> y & 1)) flow += k.mu()(x) * k.P()(x, y);
    double var = mA * (1.0 - mA);
    if (var > u) best = std::min(best, flow / var);
  }
  return best;
}

/// Row-stochastic matrix with i.i.d. uniform entries.
inline Matrix random_stochastic(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix P(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) P(i, j) = unif(rng);
    P.row(i) /= P.row(i).sum();
  }
  return P;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector f(n);
  for (auto& x : f) x = unif(rng);
  return f;
}

inline wpi::FiniteKernel two_state(double p, double q) {
  Matrix P(2, 2);
  P << 1.0 - p, p, q, 1.0 - q;
  return wpi::FiniteKernel(P);
}

/// The independent kernel: every row equals mu.
inline wpi::FiniteKernel independent(const Vector& mu) {
  Matrix P = Vector::Ones(mu.size()) * mu.transpose();
  return wpi::FiniteKernel(P, mu);
}

/// Matcher for CHECK_THROWS_MATCHES on the error kind.
inline auto is_kind(wpi::ErrorKind kind) {
  return Catch::Matchers::Predicate<wpi::Error>([kind](const wpi::Error& e) { return e.kind() == kind; },
                                                std::string("error kind ") + wpi::to_string(kind));
}

}  // namespace oracle
