#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <vector>

#include "wpi/conductance.hpp"
#include "wpi/finite_kernel.hpp"
#include "wpi/rate_calculus.hpp"

namespace wpi {

// ---------------------------------------------------------------------------------------------
// restrictions

/// P_C(x,y) = P(x,y) for y in C, y != x; P_C(x,x) = P(x,x) + P(x, C^c).  Invariant law mu_C.
/// A nonreversible P need not leave mu_C invariant, so the stationary law is then recomputed
/// and `mu_invariant` is false.
struct Restriction {
  FiniteKernel kernel;
  std::vector<int> states;
  double mass = 0.0;  ///< mu(C)
  bool mu_invariant = true;
};

inline Restriction restrict(const FiniteKernel& k, std::vector<int> C) {
  std::sort(C.begin(), C.end());
  C.erase(std::unique(C.begin(), C.end()), C.end());
  for (int c : C)
    if (c < 0 || c >= k.size()) fail(ErrorKind::InvalidInput, "restriction state out of range");
  double mass = 0.0;
  for (int c : C) mass += k.mu()(c);
  if (C.empty() || !(mass > 0.0)) fail(ErrorKind::EmptyRestriction, "restriction set has zero mass");
  const int m = int(C.size());
  Matrix Q(m, m);
  Vector mu(m);
  for (int a = 0; a < m; ++a) {
    mu(a) = k.mu()(C[a]) / mass;
    double inside = 0.0;
    for (int b = 0; b < m; ++b) {
      Q(a, b) = k.P()(C[a], C[b]);
      inside += Q(a, b);
    }
    Q(a, a) += std::max(0.0, 1.0 - inside);
  }
  Restriction r;
  r.states = C;
  r.mass = mass;
  Vector drift = (mu.transpose() * Q).transpose() - mu;
  if (drift.cwiseAbs().maxCoeff() <= 1e-10) {
    r.kernel = FiniteKernel(std::move(Q), mu);
  } else {
    r.mu_invariant = false;
    r.kernel = FiniteKernel(std::move(Q));
  }
  return r;
}

/// Right spectral gap of P_C, +inf for a single state; nullopt when P is not reversible (the
/// restriction is then not mu_C-reversible and the gap is not meaningful).
inline std::optional<double> restricted_gap(const FiniteKernel& k, const std::vector<int>& C) {
  if (!k.is_reversible(1e-10)) return std::nullopt;
  Restriction r = restrict(k, C);
  if (r.states.size() == 1) return kInf;
  return spectral_gap(r.kernel);
}

/// beta(s) = 1 ^ min{ mu(A^c) : A in family, gap(P_A) >= mu(A)/s }, returned exactly as a step
/// function jumping at the thresholds s_A = mu(A)/gap(P_A).
inline WpiCertificate wpi_from_restrictions(const FiniteKernel& k, const std::vector<std::vector<int>>& family) {
  if (!k.is_reversible(1e-10)) fail(ErrorKind::NotReversible, "restriction WPI needs a reversible kernel");
  std::vector<std::pair<double, double>> jumps;  // (threshold, mu(A^c))
  for (const auto& A : family) {
    Restriction r = restrict(k, A);
    double gap = r.states.size() == 1 ? kInf : spectral_gap(r.kernel);
    if (!(gap > 0.0)) continue;
    double thr = std::isfinite(gap) ? r.mass / gap : 0.0;
    jumps.push_back({thr, std::max(0.0, 1.0 - r.mass)});
  }
  std::sort(jumps.begin(), jumps.end());
  std::vector<double> grid{kTiny}, vals{1.0};
  for (const auto& [thr, tail] : jumps) {
    if (tail >= vals.back()) continue;
    double s = std::max(thr, kTiny);
    if (s <= grid.back()) {
      vals.back() = tail;
    } else {
      grid.push_back(s);
      vals.push_back(tail);
    }
  }
  MonotoneRate beta = MonotoneRate::tabulated(grid, vals, TabMode::Step);
  if (vals.back() == 0.0) beta = beta.with_cutoff(grid.back());
  return beta_certificate(beta, 1.0, "restrictions");
}

// ---------------------------------------------------------------------------------------------
// Dirichlet forms of P and P*P

struct DirichletPair {
  double e_p = 0.0;       ///< E(P,f)
  double e_pp = 0.0;      ///< E(P*P,f)
  double holding = 0.0;   ///< min_x P(x,x)
  bool upper_ok = true;   ///< E(P*P,f) <= 2 E(P,f)
  bool lower_ok = true;   ///< E(P*P,f) >= 2 eps E(P,f), checked when eps > 0
};

inline DirichletPair dirichlet_pp_bounds(const FiniteKernel& k, const Vector& f, double tol = 1e-12) {
  DirichletPair d;
  d.e_p = dirichlet_form(k, f);
  d.e_pp = dirichlet_form_adjoint_product(k, f);
  d.holding = k.min_holding();
  double scale = tol * std::max(1.0, d.e_p);
  d.upper_ok = d.e_pp <= 2.0 * d.e_p + scale;
  d.lower_ok = d.holding <= 0.0 || d.e_pp + scale >= 2.0 * d.holding * d.e_p;
  return d;
}

// ---------------------------------------------------------------------------------------------
// irreducibility

struct RupiReport {
  bool irreducible = true;
  int from = -1;  ///< a state of a smallest closed class
  int to = -1;    ///< a state it cannot reach
};

/// Communication test on the support graph of T restricted to mu-positive states.  A failing
/// pair (from, to) has sum_n <1_from, T^n 1_to> = 0.
inline RupiReport rupi_check(const FiniteKernel& T, double zero_tol = 0.0) {
  const int n = T.size();
  std::vector<int> live;
  for (int i = 0; i < n; ++i)
    if (T.mu()(i) > 0.0) live.push_back(i);
  RupiReport rep;
  std::size_t best = live.size() + 1;
  std::vector<char> best_seen;
  int best_from = -1;
  for (int s : live) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      for (int y = 0; y < n; ++y)
        if (!seen[y] && T.P()(x, y) > zero_tol && T.mu()(y) > 0.0) {
          seen[y] = 1;
          ++count;
          q.push(y);
        }
    }
    if (count < best) {
      best = count;
      best_seen = seen;
      best_from = s;
    }
  }
  if (best < live.size()) {
    rep.irreducible = false;
    rep.from = best_from;
    for (int y : live)
      if (!best_seen[y]) {
        rep.to = y;
        break;
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// the beta-sieve

/// Phi_beta(g) = ||g||^2 sup_s (1 - s delta)/beta(s) with delta = E(P*P,g)/||g||^2.
inline double phi_beta_value(double norm_sq, double delta, const MonotoneRate& beta) {
  if (!(norm_sq > 0.0)) fail(ErrorKind::ZeroFunction, "the observable vanishes");
  if (delta <= 0.0) return kInf;
  if (beta.is<PowerLaw>() && beta.floor() == 0.0 && !std::isfinite(beta.cutoff()) && !std::isfinite(beta.sup())) {
    const auto& p = beta.as<PowerLaw>();
    double a = p.p;
    return norm_sq / p.c * std::pow(a, a) / std::pow(a + 1.0, a + 1.0) * std::pow(delta, -a);
  }
  auto h = [&](double s) {
    double b = beta(s);
    double num = 1.0 - s * delta;
    if (num <= 0.0) return 0.0;
    return b > 0.0 ? num / b : kInf;
  };
  double smax = 1.0 / delta;
  double best = 0.0, arg = smax;
  for (double s : log_grid(smax * 1e-12, smax, 2001)) {
    double v = h(s);
    if (v > best) best = v, arg = s;
  }
  if (!std::isfinite(best)) return kInf;
  double lo = std::max(smax * 1e-12, arg / 1.02), hi = std::min(smax, arg * 1.02);
  double s = golden_max([&](double t) { return h(t); }, lo, hi, 1e-14);
  return norm_sq * std::max(best, h(s));
}

struct PhiBetaReport {
  std::vector<double> per_n;  ///< Phi_beta(P^n f), n = 0..n_max
  double value = 0.0;         ///< max over n: a lower bound on the supremum over all n
  std::size_t argmax = 0;
};

/// From the moments M_n = ||P^n f||^2: delta_n = 1 - M_{n+1}/M_n.
inline PhiBetaReport phi_beta_from_moments(const std::vector<double>& M, const MonotoneRate& beta) {
  if (M.size() < 2) fail(ErrorKind::InvalidInput, "need at least two moments");
  PhiBetaReport r;
  for (std::size_t n = 0; n + 1 < M.size(); ++n) {
    if (n == 0 && !(M[0] > 0.0)) fail(ErrorKind::ZeroFunction, "the observable vanishes");
    if (!(M[n] > 0.0)) break;
    double delta = 1.0 - M[n + 1] / M[n];
    r.per_n.push_back(phi_beta_value(M[n], delta, beta));
    if (r.per_n.back() > r.value) r.value = r.per_n.back(), r.argmax = n;
  }
  return r;
}

inline PhiBetaReport phi_beta_eval(const FiniteKernel& k, const Vector& f, const MonotoneRate& beta, std::size_t n_max) {
  return phi_beta_from_moments(pn_decay(k, f, n_max + 1), beta);
}

inline PhiBetaReport phi_beta_eval(const SpectralMeasure& nu, const MonotoneRate& beta, std::size_t n_max) {
  std::vector<double> M;
  for (std::size_t n = 0; n <= n_max + 1; ++n) M.push_back(nu.moment(2.0 * double(n)));
  return phi_beta_from_moments(M, beta);
}

// ---------------------------------------------------------------------------------------------
// sticky sets

/// sup_eps mu(A_eps)(1 - s eps - mu(A_eps)) with A_eps = {x : P(x,x) >= 1 - eps}.  A_eps only
/// changes at eps = 1 - P(x,x), and for a fixed set the expression falls with eps, so those
/// values are the only candidates.
inline double sticky_set_bound(const FiniteKernel& k, double s) {
  std::vector<std::pair<double, double>> escape;  // (1 - P(x,x), mu(x))
  for (int x = 0; x < k.size(); ++x) escape.push_back({std::max(0.0, 1.0 - k.P()(x, x)), k.mu()(x)});
  std::sort(escape.begin(), escape.end());
  double best = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < escape.size(); ++i) {
    mass += escape[i].second;
    if (i + 1 < escape.size() && escape[i + 1].first == escape[i].first) continue;
    best = std::max(best, mass * (1.0 - s * escape[i].first - mass));
  }
  return best;
}

struct StickyFloor {
  double c, C, alpha;
  /// c k s^-alpha [1/(1+alpha) - C k s^-alpha], k = (alpha/(1+alpha))^alpha
  double formula(double s) const {
    double k = std::pow(alpha / (1.0 + alpha), alpha);
    double x = std::pow(s, -alpha);
    return c * k * x * (1.0 / (1.0 + alpha) - C * k * x);
  }
  /// beta* is nonincreasing, so it also dominates sup_{t >= s} formula(t).
  double hull(double s) const {
    double k = std::pow(alpha / (1.0 + alpha), alpha);
    double x_peak = 1.0 / (2.0 * C * k * (1.0 + alpha));
    double s_peak = std::pow(x_peak, -1.0 / alpha);
    return std::max(0.0, formula(std::max(s, s_peak)));
  }
};

/// The polynomial floor implied by c eps^alpha <= mu(A_eps) <= C eps^alpha, tabulated from below
/// (each step carries the value at its right end).
inline MonotoneRate sticky_polynomial_floor(const std::function<double(double)>& mu_a_eps, double alpha, double c,
                                            double C, const std::vector<double>& eps_samples,
                                            const std::vector<double>& grid = log_grid(1e-4, 1e12, 1024)) {
  if (!(alpha > 0.0 && c > 0.0 && C >= c)) fail(ErrorKind::InvalidInput, "need alpha > 0 and 0 < c <= C");
  for (double e : eps_samples) {
    double m = mu_a_eps(e), lo = c * std::pow(e, alpha), hi = C * std::pow(e, alpha);
    if (m < lo * (1.0 - 1e-12) || m > hi * (1.0 + 1e-12))
      fail(ErrorKind::BracketViolation, "mu(A_eps) = " + fmt17(m) + " leaves [" + fmt17(lo) + ", " + fmt17(hi) +
                                            "] at eps = " + fmt17(e));
  }
  StickyFloor fl{c, C, alpha};
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = i + 1 < grid.size() ? fl.hull(grid[i + 1]) : 0.0;
  return MonotoneRate::tabulated(grid, vals, TabMode::Step).with_cutoff(grid.back());
}

}  // namespace wpi
