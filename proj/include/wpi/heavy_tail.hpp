#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "wpi/monotone_rate.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

/// Heavy-tailed target with mu(|X| > rho) = rho^-t for rho >= 1, and a kernel whose increments
/// satisfy P(|xi| <= K) >= 1 - D K^-eta.
struct HeavyTail {
  double t = 2.0;
  double eta = 1.0;
  double D = 1.0;

  void validate() const {
    if (!(t > 0.0 && eta > 0.0 && D > 0.0)) fail(ErrorKind::DomainError, "need t, eta, D > 0");
  }
  /// e = (1/t) eta/(eta+1), the exponent of the conductance envelope
  double envelope_exponent() const { return eta / (t * (eta + 1.0)); }
  /// t (eta+1)/eta, the exponent of the beta* floor
  double floor_exponent() const { return t * (eta + 1.0) / eta; }

  /// 1 - (1 - D K^-eta)_+ / (1 + v^(1/t) K)^t at K = v^(-1/(t + eta t)), the bound on
  /// 1 - phi(rho, K) b(K) with v = 2u.  Written through x = v^e to avoid cancellation.
  double bracket(double v) const {
    const double x = std::pow(v, envelope_exponent());
    if (D * x >= 1.0) return 1.0;
    return -std::expm1(-t * std::log1p(x)) + D * x * std::exp(-t * std::log1p(x));
  }
  /// v^-e bracket(v), which tends to t + D as v -> 0
  double scaled_bracket(double v) const { return bracket(v) / std::pow(v, envelope_exponent()); }

  /// kappa(u) <= 2 bracket(2u) for u < 1/4
  double kappa_bar(double u) const { return u < 0.25 ? 2.0 * bracket(2.0 * u) : kInf; }
};

struct HeavyTailFloor {
  HeavyTail model;
  std::array<double, 3> v{1e-4, 1e-6, 1e-8};
  std::array<double, 3> scaled{};  ///< scaled_bracket at each v
  double limit_estimate = 0.0;      ///< quadratic extrapolation in x = v^e to x = 0
  double limit_exact = 0.0;         ///< t + D
  double envelope_exponent = 0.0;
  double envelope_constant = 0.0;   ///< kappa(u) <~ envelope_constant u^envelope_exponent
  double floor_exponent = 0.0;
  MonotoneRate alpha_lower;         ///< lower bound on alpha*
  MonotoneRate beta_floor;          ///< lower bound on beta*
};

/// alpha*(r) >= 1/(2 kappa(2r)) >= 1/(2 kappa_bar(2r)) for r < 1/8.  Because alpha* is
/// nonincreasing this is first replaced by its running maximum from the right, then tabulated
/// from below (each step takes the value at its right end) and inverted.
inline HeavyTailFloor heavy_tail_floor(const HeavyTail& m, const std::vector<double>& r_grid = log_grid(1e-200, 0.125, 4096)) {
  m.validate();
  HeavyTailFloor out;
  out.model = m;
  const double e = m.envelope_exponent();
  std::array<double, 3> xs{};
  for (int i = 0; i < 3; ++i) {
    out.scaled[i] = m.scaled_bracket(out.v[i]);
    xs[i] = std::pow(out.v[i], e);
  }
  // Lagrange interpolation through (x_i, scaled_i), evaluated at x = 0
  double lim = 0.0;
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) w *= xs[j] / (xs[j] - xs[i]);
    lim += w * out.scaled[i];
  }
  out.limit_estimate = lim;
  out.limit_exact = m.t + m.D;
  out.envelope_exponent = e;
  out.envelope_constant = 2.0 * (m.t + m.D) * std::pow(2.0, e);
  out.floor_exponent = m.floor_exponent();

  if (r_grid.size() < 2 || !(r_grid.back() <= 0.125)) fail(ErrorKind::InvalidInput, "r grid must lie in (0, 1/8]");
  std::vector<double> g(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) g[i] = 1.0 / (2.0 * m.kappa_bar(2.0 * r_grid[i]));
  for (std::size_t i = g.size() - 1; i-- > 0;) g[i] = std::max(g[i], g[i + 1]);
  std::vector<double> vals(r_grid.size());
  for (std::size_t i = 0; i < r_grid.size(); ++i) vals[i] = i + 1 < r_grid.size() ? g[i + 1] : 0.0;
  out.alpha_lower = MonotoneRate::tabulated(r_grid, vals, TabMode::Step).with_cutoff(r_grid.back());
  out.beta_floor = generalized_inverse(out.alpha_lower);
  return out;
}

}  // namespace wpi
