#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wpi/conjugate.hpp"
#include "wpi/monotone_rate.hpp"

namespace wpi {

enum class Sieve { OscSq, PNorm, Custom };
enum class Parametrization { Alpha, Beta };

/// A weak Poincare inequality for a kernel T against a sieve Phi:
///   Alpha:  ||f||^2 <= alpha(r) E(T,f) + r Phi(f)
///   Beta:   ||f||^2 <= s E(T,f) + beta(s) Phi(f)
/// `a_bound` is an upper bound on sup ||f||^2 / Phi(f) over centred f (1 for the squared
/// oscillation norm).  `kernel` names the operator T the inequality is stated for.
struct WpiCertificate {
  Sieve sieve = Sieve::OscSq;
  double sieve_p = 2.0;
  std::string sieve_name;
  Parametrization param = Parametrization::Beta;
  MonotoneRate rate;
  double a_bound = 1.0;
  std::string kernel = "P";
  std::string origin;

  bool same_sieve(const WpiCertificate& o) const {
    if (sieve != o.sieve) return false;
    if (sieve == Sieve::PNorm) return sieve_p == o.sieve_p;
    if (sieve == Sieve::Custom) return sieve_name == o.sieve_name;
    return true;
  }

  /// Throws InvalidCertificate if an alpha rate is positive at or beyond a_bound.
  void validate() const {
    if (!(a_bound > 0.0) || !std::isfinite(a_bound))
      fail(ErrorKind::InvalidCertificate, "a_bound must be positive and finite");
    if (param == Parametrization::Alpha && rate(a_bound) != 0.0)
      fail(ErrorKind::InvalidCertificate,
           "alpha(" + fmt17(a_bound) + ") = " + fmt17(rate(a_bound)) + " must vanish at a_bound");
  }
};

inline WpiCertificate beta_certificate(MonotoneRate beta, double a_bound = 1.0, std::string origin = "",
                                       std::string kernel = "P") {
  WpiCertificate c;
  c.param = Parametrization::Beta;
  c.rate = std::move(beta);
  c.a_bound = a_bound;
  c.origin = std::move(origin);
  c.kernel = std::move(kernel);
  return c;
}

inline WpiCertificate alpha_certificate(MonotoneRate alpha, double a_bound = 1.0, std::string origin = "",
                                        std::string kernel = "P") {
  WpiCertificate c = beta_certificate(std::move(alpha), a_bound, std::move(origin), std::move(kernel));
  c.param = Parametrization::Alpha;
  return c;
}

/// A bound gamma(n) on ||P^n f||^2 / Phi(f) for n = 0..N.
struct ConvergenceProfile {
  std::vector<double> gamma;
  std::string origin;

  std::size_t n_max() const { return gamma.empty() ? 0 : gamma.size() - 1; }
  double operator[](std::size_t n) const { return gamma.at(n); }

  /// Log-linear interpolation at real t; exact for geometric profiles.
  double at(double t) const {
    if (t <= 0.0) return gamma.front();
    std::size_t n = std::size_t(std::floor(t));
    if (n >= n_max()) return gamma.back();
    double w = t - double(n);
    double g0 = gamma[n], g1 = gamma[n + 1];
    if (g0 <= 0.0 || g1 <= 0.0) return g0 + w * (g1 - g0);
    return std::exp((1.0 - w) * std::log(g0) + w * std::log(g1));
  }
};

// ---------------------------------------------------------------------------------------------
// alpha <-> beta

inline WpiCertificate alpha_to_beta(const WpiCertificate& cert) {
  if (cert.param != Parametrization::Alpha) fail(ErrorKind::InvalidCertificate, "expected an alpha certificate");
  cert.validate();
  WpiCertificate out = cert;
  out.param = Parametrization::Beta;
  out.rate = generalized_inverse(cert.rate).with_cap(cert.a_bound);
  out.origin = cert.origin.empty() ? "alpha_to_beta" : cert.origin + "|alpha_to_beta";
  return out;
}

/// Values of beta above a_bound say nothing the sieve does not already say, so the input is
/// clipped at a_bound first; the resulting alpha vanishes on [a_bound, inf).
inline WpiCertificate beta_to_alpha(const WpiCertificate& cert) {
  if (cert.param != Parametrization::Beta) fail(ErrorKind::InvalidCertificate, "expected a beta certificate");
  cert.validate();
  WpiCertificate out = cert;
  out.param = Parametrization::Alpha;
  out.rate = generalized_inverse(cert.rate.with_cap(cert.a_bound));
  if (out.rate(cert.a_bound) != 0.0) out.rate = out.rate.with_cutoff(cert.a_bound);
  out.origin = cert.origin.empty() ? "beta_to_alpha" : cert.origin + "|beta_to_alpha";
  return out;
}

// ---------------------------------------------------------------------------------------------
// convergence

/// gamma(n) = F_a^{-1}(n) with F_a(x) = int_x^a dv / K*(v).
inline ConvergenceProfile gamma_from_beta(const WpiCertificate& cert, std::size_t n_max) {
  WpiCertificate b = cert.param == Parametrization::Beta ? cert : alpha_to_beta(cert);
  const double a = b.a_bound;
  double floor_value = b.rate.limit_at_infinity();
  if (floor_value >= a)
    fail(ErrorKind::DivergentIntegral, "K* vanishes on [0,a]; int dv/K* diverges at the upper limit");
  if (floor_value > 0.0)
    fail(ErrorKind::NonVanishingGamma, "beta tends to " + fmt17(floor_value) + " > 0; gamma stalls");
  ConjugateRate kstar = k_transform(b.rate);
  ConvergenceProfile prof;
  prof.gamma = kstar.gamma(n_max, a);
  prof.origin = (b.origin.empty() ? std::string("wpi") : b.origin) + "|gamma_from_beta";
  return prof;
}

/// v_{n+1} = v_n - K*(v_n), clamped at 0.
inline std::vector<double> iterate_bound(const ConjugateRate& kstar, double v0, std::size_t n, double a = 1.0) {
  if (!(v0 >= 0.0) || v0 > a) fail(ErrorKind::DomainError, "v0 must lie in [0, a]");
  std::vector<double> v(n + 1);
  v[0] = v0;
  for (std::size_t k = 1; k <= n; ++k) {
    double kk = kstar(v[k - 1]);
    v[k] = std::isfinite(kk) ? std::max(0.0, v[k - 1] - kk) : 0.0;
  }
  return v;
}

enum class RecoveryMode { IterateForm, FForm, ReversibleDecreasing };

namespace detail {

inline void check_profile(const ConvergenceProfile& g) {
  if (g.gamma.size() < 3) fail(ErrorKind::ShapeViolation, "profile needs at least three terms");
  for (std::size_t n = 1; n < g.gamma.size(); ++n)
    if (!(g.gamma[n] < g.gamma[n - 1]) || !(g.gamma[n] > 0.0))
      fail(ErrorKind::ShapeViolation, "profile must be positive and strictly decreasing at n=" + std::to_string(n));
}

/// Greatest convex minorant through the origin of points sorted by x.
inline PiecewiseLinear convex_minorant(std::vector<double> x, std::vector<double> y) {
  std::vector<double> hx{0.0}, hy{0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= hx.back()) continue;
    while (hx.size() >= 2) {
      std::size_t m = hx.size();
      double s1 = (hy[m - 1] - hy[m - 2]) / (hx[m - 1] - hx[m - 2]);
      double s2 = (y[i] - hy[m - 1]) / (x[i] - hx[m - 1]);
      if (s2 <= s1)
        hx.pop_back(), hy.pop_back();
      else
        break;
    }
    hx.push_back(x[i]);
    hy.push_back(y[i]);
  }
  PiecewiseLinear pl;
  pl.x = hx;
  pl.y = hy;
  pl.infinite_beyond = true;
  return pl;
}

}  // namespace detail

/// Recover a K* from a convergence profile.  The knots sit at the profile values; the
/// result satisfies K*'(gamma(n)) = gamma(n) - gamma(n+1) in the iterate form.
inline ConjugateRate beta_from_gamma(const ConvergenceProfile& g, RecoveryMode mode, double tol = 1e-12) {
  detail::check_profile(g);
  const auto& gm = g.gamma;
  const std::size_t N = gm.size() - 1;
  std::vector<double> xs, ys;
  switch (mode) {
    case RecoveryMode::IterateForm: {
      for (std::size_t n = N; n-- > 0;) {
        xs.push_back(gm[n]);
        ys.push_back(gm[n] - gm[n + 1]);
      }
      for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] < ys[i - 1] - tol * std::max(1.0, ys[i]))
          fail(ErrorKind::ShapeViolation, "increments gamma(n)-gamma(n+1) must be nonincreasing in n");
      break;
    }
    case RecoveryMode::FForm: {
      // F^{-1} convex and log(-D F^{-1}) convex, checked on the discrete differences.
      std::vector<double> d(N);
      for (std::size_t n = 0; n < N; ++n) d[n] = gm[n] - gm[n + 1];
      for (std::size_t n = 1; n < N; ++n)
        if (d[n] > d[n - 1] * (1.0 + tol))
          fail(ErrorKind::ShapeViolation, "F^{-1} is not convex at n=" + std::to_string(n));
      for (std::size_t n = 1; n + 1 < N; ++n)
        if (std::log(d[n - 1]) + std::log(d[n + 1]) - 2.0 * std::log(d[n]) < -1e-9)
          fail(ErrorKind::ShapeViolation, "log(-D F^{-1}) is not convex at n=" + std::to_string(n));
      // K*(v) = v - F^{-1}(1 + F(v)) at v = gamma(n) and at the half-integer points.
      for (std::size_t h = 2 * (N - 1) + 1; h-- > 0;) {
        double t = 0.5 * double(h);
        if (t + 1.0 > double(N)) continue;
        double v = g.at(t);
        xs.push_back(v);
        ys.push_back(v - g.at(t + 1.0));
      }
      break;
    }
    case RecoveryMode::ReversibleDecreasing: {
      for (std::size_t n = N; n-- > 0;) {
        xs.push_back(gm[n]);
        ys.push_back(gm[n] - gm[n + 1]);
      }
      return ConjugateRate::piecewise(detail::convex_minorant(xs, ys));
    }
  }
  PiecewiseLinear pl;
  pl.x.push_back(0.0);
  pl.y.push_back(0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= pl.x.back()) continue;
    pl.x.push_back(xs[i]);
    pl.y.push_back(std::max(ys[i], pl.y.back()));
  }
  pl.infinite_beyond = true;
  return ConjugateRate::piecewise(std::move(pl));
}

/// beta(s) = s K(1/s) with K(u) = sup_v (u v - K*(v)), evaluated over the knots of K*.
inline MonotoneRate beta_from_conjugate(const ConjugateRate& kstar, std::vector<double> grid = default_rate_grid()) {
  const PiecewiseLinear& pl = kstar.integration_knots();
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double u = 1.0 / grid[i];
    double best = 0.0;
    for (std::size_t j = 0; j < pl.x.size(); ++j) best = std::max(best, u * pl.x[j] - pl.y[j]);
    vals[i] = grid[i] * best;
  }
  for (std::size_t i = vals.size() - 1; i-- > 0;) vals[i] = std::max(vals[i], vals[i + 1]);
  return MonotoneRate::tabulated(std::move(grid), std::move(vals), TabMode::Step);
}

/// gamma_p(n) <= 2^(4 + 4/p) gamma(n)^(1 - 2/p), for p > 2.
inline ConvergenceProfile gamma_p_extend(const ConvergenceProfile& g, double p) {
  if (!(p > 2.0)) fail(ErrorKind::DomainError, "p must exceed 2");
  ConvergenceProfile out;
  out.origin = g.origin + "|gamma_p(" + fmt17(p) + ")";
  out.gamma.resize(g.gamma.size());
  double c = std::pow(2.0, 4.0 + 4.0 / p);
  for (std::size_t n = 0; n < g.gamma.size(); ++n) out.gamma[n] = c * std::pow(g.gamma[n], 1.0 - 2.0 / p);
  return out;
}

// ---------------------------------------------------------------------------------------------
// asymptotic variance and spectral mass

struct AsymVarBound {
  double B = 0.0;      ///< int_0^v w / K*(w) dw at v = ||f||^2 / Phi(f)
  double bound = 0.0;  ///< 4 Phi(f) B
};

/// Checks that v - K*(v) is nondecreasing on (0, a] on a log grid.
inline bool id_minus_kstar_monotone(const ConjugateRate& kstar, double a, std::size_t points = 400) {
  auto grid = log_grid(a * 1e-9, a, points);
  double prev = -kInf;
  for (double v : grid) {
    double k = kstar(v);
    if (!std::isfinite(k)) return true;  // past vmax the chain of iterates is already at 0
    double h = v - k;
    if (h < prev - 1e-12 * std::max(1.0, std::abs(prev))) return false;
    prev = h;
  }
  return true;
}

inline AsymVarBound asym_var_bound(const ConjugateRate& kstar, double norm_sq, double phi, double a = 1.0) {
  if (!(phi > 0.0)) fail(ErrorKind::DomainError, "Phi(f) must be positive");
  if (!id_minus_kstar_monotone(kstar, a))
    fail(ErrorKind::AssumptionViolated, "v - K*(v) is not increasing on (0, a]");
  double v = norm_sq / phi;
  AsymVarBound r;
  r.B = kstar.B(v);
  if (!std::isfinite(r.B)) fail(ErrorKind::DivergentB, "int_0^v w/K*(w) dw diverges at 0");
  r.bound = 4.0 * phi * r.B;
  return r;
}

/// inf_{n>=1} gamma(n) / exp(-delta n): bounds P_{nu_f}(lambda^2 > e^-delta) / Phi(f).
inline double spectral_mass_bound(const ConvergenceProfile& g, double delta) {
  if (!(delta > 0.0)) fail(ErrorKind::DomainError, "delta must be positive");
  double best = kInf;
  for (std::size_t n = 1; n < g.gamma.size(); ++n)
    best = std::min(best, g.gamma[n] * std::exp(delta * double(n)));
  return best;
}

// ---------------------------------------------------------------------------------------------
// ordering

enum class RateOrder { FirstDominates, SecondDominates, Equal, Crossing };

struct RateComparison {
  RateOrder order = RateOrder::Equal;
  double first_crossing = kInf;  ///< first grid point where the ordering flips, if any
};

/// Compares two certificates' rates on a grid.  A larger beta means a weaker inequality and,
/// through the monotonicity of gamma_from_beta, a larger (slower) gamma.
inline RateComparison order_rates(const WpiCertificate& c1, const WpiCertificate& c2,
                                  const std::vector<double>& grid = default_rate_grid(), double tol = 1e-12) {
  if (!c1.same_sieve(c2)) fail(ErrorKind::IncomparableSieves, "certificates use different sieves");
  if (c1.param != c2.param) fail(ErrorKind::IncomparableSieves, "certificates use different parametrizations");
  int sign = 0;
  RateComparison out;
  for (double s : grid) {
    double d = c1.rate(s) - c2.rate(s);
    int here = d > tol ? 1 : (d < -tol ? -1 : 0);
    if (here == 0) continue;
    if (sign == 0) {
      sign = here;
    } else if (here != sign) {
      out.order = RateOrder::Crossing;
      out.first_crossing = s;
      return out;
    }
  }
  out.order = sign > 0 ? RateOrder::FirstDominates : sign < 0 ? RateOrder::SecondDominates : RateOrder::Equal;
  return out;
}

// ---------------------------------------------------------------------------------------------
// combining two rates into one for P^2

/// beta(s) = inf{ s1 * outer(s2) + inner(s1) : s1 s2 = s }, with s1 restricted to a log grid of
/// `split_points` values per evaluation.  Restricting the infimum and tabulating with left-end
/// values both err upwards, so the table is a valid (if slightly weaker) rate.
inline MonotoneRate multiplicative_inf_convolution(const MonotoneRate& outer, const MonotoneRate& inner,
                                                   std::vector<double> grid = default_rate_grid(),
                                                   std::size_t split_points = 512) {
  auto splits = log_grid(1e-12, 1e12, split_points);
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = grid[i], best = kInf;
    for (double s1 : splits) {
      double o = outer(s / s1);
      double term = (o == 0.0 ? 0.0 : s1 * o) + inner(s1);
      best = std::min(best, term);
    }
    vals[i] = best;
  }
  for (std::size_t i = vals.size() - 1; i-- > 0;) vals[i] = std::max(vals[i], vals[i + 1]);
  return MonotoneRate::tabulated(std::move(grid), std::move(vals), TabMode::Step);
}

}  // namespace wpi
