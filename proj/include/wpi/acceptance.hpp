#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wpi/abc.hpp"
#include "wpi/bounds.hpp"
#include "wpi/chain_tools.hpp"
#include "wpi/clt.hpp"
#include "wpi/conductance.hpp"
#include "wpi/imh.hpp"
#include "wpi/level_walk.hpp"
#include "wpi/rate_calculus.hpp"
#include "wpi/rwm.hpp"

namespace wpi {

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  unsigned parallelism = 1;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  ///< measured values, and the witness on failure
  double seconds = 0.0;
};

/// Random reversible chain on n states: symmetric weights with about 30% of off-diagonal pairs
/// removed, neighbours kept connected, P = D^-1 W and mu proportional to the row sums.
inline FiniteKernel random_reversible_chain(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix W(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      double w = unif(rng);
      if (i != j && unif(rng) < 0.3) w = 0.0;
      W(i, j) = W(j, i) = w;
    }
  for (int i = 0; i + 1 < n; ++i)
    if (W(i, i + 1) == 0.0) W(i, i + 1) = W(i + 1, i) = 0.05;
  Vector deg = W.rowwise().sum();
  Matrix P = deg.cwiseInverse().asDiagonal() * W;
  return FiniteKernel(std::move(P), Vector(deg / deg.sum()));
}

/// Random nonincreasing step table ending at 0, with plateaus and jumps of random size.
inline MonotoneRate random_step_rate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int m = 2 + int(rng() % 10);
  std::vector<double> grid, vals;
  double x = std::exp(-3.0 + 6.0 * unif(rng)), y = 1.0 + 10.0 * unif(rng);
  for (int i = 0; i < m; ++i) {
    grid.push_back(x);
    vals.push_back(y);
    x *= 1.0 + 3.0 * unif(rng);
    if (unif(rng) >= 0.2) y *= unif(rng);
  }
  vals.back() = 0.0;
  return MonotoneRate::tabulated(grid, vals).with_cutoff(grid.back());
}

namespace detail {

inline std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

/// x <= y with +inf on the right always satisfied.
inline bool le_inf(double x, double y, double rel = 1e-12) {
  return !std::isfinite(y) || x <= y * (1.0 + rel) + 1e-300;
}

}  // namespace detail

inline CriterionResult acceptance_imh_spectrum(const AcceptanceOptions&) {
  CriterionResult r{1, "imh-spectrum"};
  auto t0 = std::chrono::steady_clock::now();
  ImhGeometric c{0.5, 0.25, 200};
  auto v = imh_spectrum_validate(c, 20);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = v.max_residual < 1e-8 && r.seconds < 5.0;
  r.detail = detail::fmt("20 smallest eigenvalues vs Lambda_1..20: max residual %.3g", v.max_residual);
  return r;
}

inline CriterionResult acceptance_imh_decay(const AcceptanceOptions&) {
  CriterionResult r{2, "imh-decay-exponent"};
  auto t0 = std::chrono::steady_clock::now();
  ImhGeometric c{0.5, 0.25, 200};
  FiniteKernel k = imh_build(c);
  Vector f = Vector::Zero(k.size());
  f(0) = 1.0;
  auto sq = pn_decay(k, f, 500);
  std::vector<double> n, norm, norm_sq;
  for (int m = 50; m <= 500; ++m) n.push_back(m), norm.push_back(std::sqrt(sq[m])), norm_sq.push_back(sq[m]);
  const double target = -c.b / (c.a - c.b);
  const double slope_sq = loglog_slope(n, norm_sq), slope = loglog_slope(n, norm);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = std::abs(slope_sq - target) <= 0.1 && r.seconds < 30.0;
  r.detail = detail::fmt("slope of ||P^n f||^2 on [50,500] = %.6f (target %.3g); ||P^n f|| slope = %.6f", slope_sq,
                         target, slope);
  return r;
}

/// Shared by the soundness sweep and the Cheeger sandwich.
inline std::vector<FiniteKernel> acceptance_chains(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FiniteKernel> out;
  for (int c = 0; c < 100; ++c) out.push_back(random_reversible_chain(rng, 4 + int(rng() % 7)));
  return out;
}

inline CriterionResult acceptance_soundness_sweep(const AcceptanceOptions& opt) {
  CriterionResult r{3, "flagship-soundness-sweep"};
  auto t0 = std::chrono::steady_clock::now();
  auto chains = acceptance_chains(opt.seed);
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  constexpr std::size_t n_max = 200;
  long violations = 0, checks = 0;
  double worst = 0.0;
  std::string witness;
  ConductanceOptions copt;
  copt.parallelism = opt.parallelism;
  for (std::size_t ci = 0; ci < chains.size(); ++ci) {
    const FiniteKernel& P = chains[ci];
    const FiniteKernel T = adjoint_product(P);
    auto gamma = gamma_from_beta(alpha_to_beta(cheeger_wpi(weak_conductance(T, copt), 1.0, "P*P")), n_max);
    for (int oi = 0; oi < 100; ++oi) {
      Vector f(P.size());
      for (auto& x : f) x = unif(rng);
      Observable o(f, P.mu());
      auto dP = pn_decay(P, f, n_max);
      auto dT = pn_decay(T, f, n_max);
      for (std::size_t n = 0; n <= n_max; ++n) {
        const double cap = gamma[n] * o.osc_sq();
        for (double d : {dP[n], dT[n]}) {
          ++checks;
          if (cap > 0.0) worst = std::max(worst, d / cap);
          if (d > cap + 1e-9) {
            if (violations++ == 0)
              witness = detail::fmt(" first violation: chain %zu, observable %d, n=%zu: %.17g > %.17g", ci, oi, n, d, cap);
          }
        }
      }
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = violations == 0 && r.seconds < 300.0;
  r.detail = detail::fmt("%ld violations in %ld checks of ||P^n f||^2 and ||(P*P)^n f||^2; max ratio to bound %.4g",
                         violations, checks, worst) + witness;
  return r;
}

inline CriterionResult acceptance_cheeger_sandwich(const AcceptanceOptions& opt) {
  CriterionResult r{4, "cheeger-sandwich"};
  auto t0 = std::chrono::steady_clock::now();
  auto chains = acceptance_chains(opt.seed);
  const auto grid = log_grid(1e-5, 0.25, 50);
  long violations = 0;
  std::string witness;
  ConductanceOptions copt;
  copt.parallelism = opt.parallelism;
  for (std::size_t ci = 0; ci < chains.size(); ++ci) {
    auto prof = weak_conductance(adjoint_product(chains[ci]), copt);
    for (double rr : grid) {
      const double kl = prof.kappa(rr / 16.0), lower = kl * kl / 16.0;
      const double ah = alpha_hat_indicators(prof, rr), mid = ah > 0.0 ? 1.0 / ah : kInf;
      const double upper = 2.0 * prof.kappa(2.0 * rr);
      bool ok = (std::isinf(lower) ? std::isinf(mid) : detail::le_inf(lower, mid)) && detail::le_inf(mid, upper);
      if (!ok && violations++ == 0)
        witness = detail::fmt(" first violation: chain %zu, r=%.17g: %.17g <= %.17g <= %.17g", ci, rr, lower, mid, upper);
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = violations == 0;
  r.detail = detail::fmt("%ld violations over %zu chains x %zu radii", violations, chains.size(), grid.size()) + witness;
  return r;
}

/// For nonincreasing right-continuous alpha and alpha^-(s) = inf{r > 0 : alpha(r) <= s}:
/// (a) alpha^- o alpha <= id, (b) alpha o alpha^- <= id, (c) alpha^- <= a_bound, and
/// (alpha^-)^- = alpha.  The same holds with the roles of alpha and beta exchanged.
inline CriterionResult acceptance_galois(const AcceptanceOptions& opt) {
  CriterionResult r{5, "alpha-beta-galois"};
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opt.seed + 5);
  constexpr double tol = 1e-10;
  long bad[4] = {0, 0, 0, 0}, points = 0, reverse_b = 0;
  std::string witness;
  for (int t = 0; t < 200; ++t) {
    MonotoneRate alpha = random_step_rate(rng);
    const auto& tab = alpha.as<Tabulated>();
    const double a_bound = tab.grid.back();
    auto acert = alpha_certificate(alpha, a_bound);
    auto bcert = alpha_to_beta(acert);
    auto back = beta_to_alpha(bcert);
    const MonotoneRate& beta = bcert.rate;
    std::vector<double> pts = log_grid(tab.grid.front() * 0.1, a_bound * 3.0, 300);
    pts.insert(pts.end(), tab.grid.begin(), tab.grid.end());
    for (double v : tab.values)
      if (v > 0.0) pts.push_back(v);
    for (double x : pts) {
      ++points;
      auto note = [&](int which, double lhs, double rhs) {
        if (bad[which]++ == 0 && witness.empty())
          witness = detail::fmt(" first failure: rate %d, property %d at x=%.17g: %.17g vs %.17g", t, which, x, lhs, rhs);
      };
      if (beta(alpha(x)) > x * (1 + tol)) note(0, beta(alpha(x)), x);
      if (alpha(beta(x)) > x * (1 + tol)) note(1, alpha(beta(x)), x);
      if (alpha(beta(x)) < x * (1 - tol)) ++reverse_b;
      if (beta(x) > a_bound * (1 + tol)) note(2, beta(x), a_bound);
      if (std::abs(back.rate(x) - alpha(x)) > tol * std::max(1.0, alpha(x))) note(3, back.rate(x), alpha(x));
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = bad[0] + bad[1] + bad[2] + bad[3] == 0;
  r.detail = detail::fmt("%ld points on 200 step rates; failures (a)=%ld (b)=%ld (c)=%ld double-inverse=%ld; "
                         "alpha o alpha^- < id (strict) at %ld points",
                         points, bad[0], bad[1], bad[2], bad[3], reverse_b) + witness;
  return r;
}

inline CriterionResult acceptance_asym_var(const AcceptanceOptions& opt) {
  CriterionResult r{6, "asymptotic-variance-dominance"};
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(opt.seed + 6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long violations = 0, errors = 0;
  double worst = 0.0;
  std::string witness;
  for (int c = 0; c < 100; ++c) {
    FiniteKernel P = random_reversible_chain(rng, 5);
    auto beta = alpha_to_beta(cheeger_wpi(weak_conductance(adjoint_product(P)), 1.0, "P*P"));
    Vector f(5);
    for (auto& x : f) x = unif(rng);
    Observable o(f, P.mu());
    const double exact = exact_asymptotic_variance(P, f);
    try {
      auto b = asym_var_bound(k_transform(beta.rate), o.variance, o.osc_sq(), beta.a_bound);
      worst = std::max(worst, exact / b.bound);
      if (exact > b.bound * (1.0 + 1e-10) && violations++ == 0)
        witness = detail::fmt(" first violation: chain %d: exact %.17g > bound %.17g", c, exact, b.bound);
    } catch (const Error& e) {
      if (errors++ == 0) witness = detail::fmt(" chain %d: %s", c, e.what());
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = violations == 0 && errors == 0;
  r.detail = detail::fmt("%ld violations, %ld errors on 100 chains; max exact/bound %.4g", violations, errors, worst) + witness;
  return r;
}

inline CriterionResult acceptance_drift(const AcceptanceOptions& opt) {
  CriterionResult r{7, "drift-constructor-exponent"};
  auto t0 = std::chrono::steady_clock::now();
  auto ch = drift_birth_death(400, 0.6);
  const FiniteKernel& k = ch.kernel;
  verify_drift(k, ch.drift);
  auto lpi = local_pi_constant_exact(k, ch.drift.C);
  const double mu_C = k.mu().dot(ch.drift.indicator_C());
  auto cert = wpi_from_drift(ch.drift, lpi, mu_C);
  std::vector<double> s = log_grid(1e6, 1e9, 50), b;
  for (double x : s) b.push_back(cert.rate(x));
  const double slope = loglog_slope(s, b), target = -ch.alpha / (1.0 - ch.alpha);

  constexpr std::size_t n_max = 2000;
  auto gamma = gamma_from_beta(cert, n_max);
  std::mt19937_64 rng(opt.seed + 7);
  std::normal_distribution<double> normal;
  long violations = 0;
  double worst = 0.0;
  std::string witness;
  for (int t = 0; t < 20; ++t) {
    Vector f(k.size());
    for (int i = 0; i < k.size(); ++i) f(i) = t == 0 ? double(i > k.size() / 2) : t == 1 ? double(i < 20) : normal(rng);
    Observable o(f, k.mu());
    auto d = pn_decay(k, f, n_max);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const double cap = gamma[n] * o.osc_sq();
      worst = std::max(worst, d[n] / cap);
      if (d[n] > cap + 1e-9 && violations++ == 0)
        witness = detail::fmt(" first violation: observable %d, n=%zu: %.17g > %.17g", t, n, d[n], cap);
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = std::abs(slope - target) <= 0.05 && violations == 0;
  r.detail = detail::fmt("beta slope on [1e6,1e9] = %.6f (target %.3g); local PI K = %.6g; gamma violations %ld "
                         "over 20 observables, max ratio %.4g",
                         slope, target, lpi.K, violations, worst) + witness;
  return r;
}

inline CriterionResult acceptance_rwm(const AcceptanceOptions& opt) {
  CriterionResult r{8, "rwm-gaussian"};
  auto t0 = std::chrono::steady_clock::now();
  const double v = std::sqrt(0.5);
  const double limit = rwm_gaussian_limit_constant(v);
  const auto big = rwm_gap_bounds(rwm_preset(RwmPotential::Gaussian, 1000000, v), RwmRegime::Gaussian);
  bool ok = std::abs(limit - 0.000926) < 5e-7;
  std::ostringstream os;
  os << detail::fmt("limit constant %.9f; kappa_lower*sqrt(d) at d=1e6 = %.9f;", limit, big.conductance_lower * 1000.0);
  for (int d : {2, 4, 8, 16}) {
    auto spec = rwm_preset(RwmPotential::Gaussian, d, v);
    auto e = rwm_conductance_mc(spec, {RwmSet{RwmSetKind::HalfSpace}}, 1000000, opt.seed, opt.parallelism).front();
    const double ceiling = rwm_halfspace_kappa_ceiling(spec);
    const bool pass_d = e.kappa.value <= ceiling + 3.0 * e.kappa.stderr_;
    ok = ok && pass_d;
    os << detail::fmt(" d=%d kappa %.5f+-%.1e <= %.5f%s;", d, e.kappa.value, e.kappa.stderr_, ceiling, pass_d ? "" : " VIOLATED");
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = ok && r.seconds < 120.0;
  r.detail = os.str();
  return r;
}

inline CriterionResult acceptance_level_walk(const AcceptanceOptions&) {
  CriterionResult r{9, "level-walk-reducibility"};
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream os;
  for (int i0 : {2, 3, 4}) {
    std::vector<double> nu;
    for (int i = 1; i <= i0; ++i) nu.push_back(std::pow(0.5, i));
    auto w = level_walk_build(nu);
    os << " i0=" << i0 << ":";
    for (int k = 1; k <= i0 + 2; ++k) {
      auto rep = rupi_check(level_walk_power_product(w, k));
      if (k < i0 - 1 && rep.irreducible) ok = false;
      if (k >= i0 && !rep.irreducible) ok = false;
      os << " k" << k << (rep.irreducible ? "=irr" : "=red");
    }
    os << ";";
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = ok;
  r.detail = "rupi on (P*)^k P^k" + os.str();
  return r;
}

inline CriterionResult acceptance_abc(const AcceptanceOptions& opt) {
  CriterionResult r{10, "abc-floor"};
  auto t0 = std::chrono::steady_clock::now();
  AbcChain chain;
  ConductanceOptions copt;
  copt.parallelism = opt.parallelism;
  auto lines = indicator_lines(weak_conductance(abc_build(chain), copt));
  auto grid = log_grid(10.0, 1000.0, 200);
  auto beta = beta_star_lower(lines, grid);
  std::vector<double> ys;
  for (double s : grid) ys.push_back(beta(s));
  const double slope = loglog_slope(grid, ys), target = -abc_floor_exponent(chain);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = std::abs(slope - target) <= 0.15;
  r.detail = detail::fmt("beta* lower slope on [10,1000] = %.5f (target %.3g)", slope, target);
  return r;
}

inline CriterionResult acceptance_clt(const AcceptanceOptions&) {
  CriterionResult r{11, "clt-criterion"};
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream os;
  for (double a : {0.5, 0.8, 0.9, 0.94, 0.95, 0.97, 1.0, 1.03, 1.05, 1.06, 1.1, 1.2, 1.5, 2.0, 3.0}) {
    ConvergenceProfile g;
    for (int n = 0; n <= 2000; ++n) g.gamma.push_back(n == 0 ? 1.0 : std::pow(double(n), -a));
    auto rep = clt_check(g);
    const bool conv = rep.verdict == CltVerdict::Converges, inc = rep.verdict == CltVerdict::Inconclusive;
    if (conv != (a > 1.05)) ok = false;
    if ((a >= 0.95 && a <= 1.05) && !inc) ok = false;
    os << detail::fmt(" a=%g:%s", a, to_string(rep.verdict));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = ok;
  r.detail = "gamma(n)=n^-a" + os.str();
  return r;
}

inline const std::vector<std::function<CriterionResult(const AcceptanceOptions&)>>& acceptance_criteria() {
  static const std::vector<std::function<CriterionResult(const AcceptanceOptions&)>> all{
      acceptance_imh_spectrum, acceptance_imh_decay,      acceptance_soundness_sweep, acceptance_cheeger_sandwich,
      acceptance_galois,       acceptance_asym_var,       acceptance_drift,           acceptance_rwm,
      acceptance_level_walk,   acceptance_abc,            acceptance_clt};
  return all;
}

/// Runs one criterion, turning an unexpected library error into a FAIL with the message.
inline CriterionResult run_criterion(std::size_t index, const AcceptanceOptions& opt) {
  try {
    return acceptance_criteria().at(index)(opt);
  } catch (const std::exception& e) {
    return CriterionResult{int(index + 1), "criterion-" + std::to_string(index + 1), false, std::string("error: ") + e.what()};
  }
}

inline std::string format_result(const CriterionResult& r) {
  return detail::fmt("%s AC%d %s (%.2f s): ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds) + r.detail;
}

}  // namespace wpi
