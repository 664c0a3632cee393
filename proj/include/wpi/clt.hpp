#pragma once

#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include "wpi/finite_kernel.hpp"
#include "wpi/numeric.hpp"
#include "wpi/rate_calculus.hpp"

namespace wpi {

enum class CltVerdict { Converges, NotEstablished, Inconclusive };

inline const char* to_string(CltVerdict v) {
  switch (v) {
    case CltVerdict::Converges: return "converges";
    case CltVerdict::NotEstablished: return "not-established";
    case CltVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

enum class DecayShape { Geometric, Polynomial, Vanished };

struct CltReport {
  CltVerdict verdict = CltVerdict::NotEstablished;
  DecayShape shape = DecayShape::Polynomial;
  double slope_a = 0.0;              ///< fitted a in gamma(n) ~ n^-a (inf for geometric decay)
  std::vector<double> partial_sums;  ///< S_N = sum_{1<=n<=N} n^-3/2 ||V_n f|| (or its bound)
  bool exact = false;                ///< true when ||V_n f|| was computed on the chain itself
};

/// Half-width of the band around the critical exponent a = 1 inside which no verdict is given.
inline constexpr double kCltBand = 0.05;

namespace detail {

/// Classifies the tail of a decreasing sequence on n in [N/4, N] by comparing least-squares
/// fits of log g against n (geometric) and against log n (polynomial).
inline std::pair<DecayShape, double> decay_shape(const std::vector<double>& g) {
  const std::size_t N = g.size() - 1;
  std::vector<double> n, lg;
  for (std::size_t k = std::max<std::size_t>(1, N / 4); k <= N; ++k)
    if (g[k] > 0.0) n.push_back(double(k)), lg.push_back(std::log(g[k]));
  if (n.size() < 8) return {DecayShape::Vanished, kInf};
  auto fit_residual = [&](auto transform) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = double(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
      double x = transform(n[i]);
      sx += x, sy += lg[i], sxx += x * x, sxy += x * lg[i];
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx), icpt = (sy - slope * sx) / m, r = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      double e = lg[i] - icpt - slope * transform(n[i]);
      r += e * e;
    }
    return std::pair{slope, r};
  };
  auto [lin_slope, lin_res] = fit_residual([](double x) { return x; });
  auto [log_slope, log_res] = fit_residual([](double x) { return std::log(x); });
  if (lin_slope < 0.0 && lin_res < log_res) return {DecayShape::Geometric, kInf};
  return {DecayShape::Polynomial, -log_slope};
}

inline CltVerdict verdict_for(DecayShape shape, double a) {
  if (shape != DecayShape::Polynomial) return CltVerdict::Converges;
  if (std::abs(a - 1.0) <= kCltBand + 1e-9) return CltVerdict::Inconclusive;
  return a > 1.0 ? CltVerdict::Converges : CltVerdict::NotEstablished;
}

}  // namespace detail

/// Maxwell-Woodroofe check from a certified profile: ||P^k f||^2 <= gamma(k) Phi(f), so
/// ||V_n f|| <= Phi^1/2 sum_{k<n} gamma(k)^1/2.  The series converges when gamma(n) = O(n^-a) with
/// a > 1; the exponent is fitted on the tail of the profile.
inline CltReport clt_check(const ConvergenceProfile& g, double phi = 1.0) {
  if (g.gamma.size() < 2) fail(ErrorKind::InvalidInput, "profile needs at least two terms");
  CltReport r;
  std::tie(r.shape, r.slope_a) = detail::decay_shape(g.gamma);
  r.verdict = detail::verdict_for(r.shape, r.slope_a);
  double vn = 0.0, s = 0.0;
  for (std::size_t n = 1; n <= g.n_max(); ++n) {
    vn += std::sqrt(std::max(g.gamma[n - 1], 0.0));
    s += std::pow(double(n), -1.5) * std::sqrt(phi) * vn;
    r.partial_sums.push_back(s);
  }
  return r;
}

/// Exact check on a finite chain: V_n f = sum_{k<n} P^k (f - mu(f)) is computed directly and the
/// verdict comes from the decay of ||P^n f||^2.
inline CltReport clt_check(const FiniteKernel& k, const Vector& f, std::size_t n_max = 1000) {
  if (n_max < 8) fail(ErrorKind::InvalidInput, "n_max must be at least 8");
  CltReport r;
  r.exact = true;
  Vector pk = f.array() - k.mu().dot(f);
  Vector vn = Vector::Zero(pk.size());
  std::vector<double> decay{mu_norm_sq(pk, k.mu())};
  double s = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    vn += pk;
    s += std::pow(double(n), -1.5) * std::sqrt(mu_norm_sq(vn, k.mu()));
    r.partial_sums.push_back(s);
    pk = k.P() * pk;
    decay.push_back(mu_norm_sq(pk, k.mu()));
  }
  // An exactly vanishing sequence converges trivially; otherwise classify its tail.
  double scale = decay.front() > 0.0 ? decay.front() : 1.0;
  for (double& d : decay)
    if (d <= 1e-28 * scale) d = 0.0;
  std::tie(r.shape, r.slope_a) = detail::decay_shape(decay);
  r.verdict = detail::verdict_for(r.shape, r.slope_a);
  return r;
}

/// A CLT holds for every f in L^p when p > 2b/(b-1), given ||P^n f||^2 decaying like n^-b on
/// bounded functions.
inline double clt_lp_threshold(double b) {
  if (!(b > 1.0)) fail(ErrorKind::DomainError, "need b > 1");
  return 2.0 * b / (b - 1.0);
}

/// sum_{k<n} k^-a/2 <= 2/(2-a) n^(1 - a/2) for 0 < a < 2 (the k = 0 term counts as 1).
inline double clt_vn_growth_bound(double a, double n) {
  if (!(a > 0.0 && a < 2.0)) fail(ErrorKind::DomainError, "need 0 < a < 2");
  return 2.0 / (2.0 - a) * std::pow(n, 1.0 - a / 2.0);
}

}  // namespace wpi
