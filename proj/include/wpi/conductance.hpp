#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "wpi/finite_kernel.hpp"
#include "wpi/parallel.hpp"
#include "wpi/rate_calculus.hpp"

namespace wpi {

/// One candidate set A: u = mu(A) mu(A^c) (= var of 1_A) and flow = mu (x) P (A x A^c) (= E(P,1_A)).
struct SetPoint {
  double u = 0.0;
  double flow = 0.0;
  std::uint64_t mask = 0;

  double ratio() const { return flow / u; }
};

/// Sets that are Pareto-optimal for (large u, small flow).  Every quantity computed from
/// indicators below (kappa, the indicator lower bound on beta*, the indicator estimate of
/// alpha*) is attained on this front.
struct ConductanceProfile {
  std::vector<SetPoint> front;  ///< ascending in u (and in flow)
  bool exact = true;            ///< false when built from sampled sets: kappa is then an upper bound
  int states = 0;

  /// kappa(u) = min{ flow/u_A : u_A > u }, +inf if no set qualifies.
  double kappa(double u) const {
    auto it = std::upper_bound(front.begin(), front.end(), u, [](double x, const SetPoint& p) { return x < p.u; });
    double best = kInf;
    for (; it != front.end(); ++it) best = std::min(best, it->ratio());
    return best;
  }

  /// Set attaining kappa(u), or 0 when kappa(u) = inf.
  std::uint64_t witness(double u) const {
    double best = kInf;
    std::uint64_t w = 0;
    for (const auto& p : front)
      if (p.u > u && p.ratio() < best) best = p.ratio(), w = p.mask;
    return w;
  }

  struct Breakpoint {
    double u_end;   ///< kappa takes `ratio` on [previous u_end, u_end)
    double ratio;
    std::uint64_t witness;
  };

  /// kappa as a right-continuous step function.
  std::vector<Breakpoint> breakpoints() const {
    std::vector<Breakpoint> out;
    const std::size_t m = front.size();
    std::vector<double> suffix(m + 1, kInf);
    std::vector<std::uint64_t> arg(m + 1, 0);
    for (std::size_t i = m; i-- > 0;) {
      suffix[i] = suffix[i + 1];
      arg[i] = arg[i + 1];
      if (front[i].ratio() <= suffix[i]) suffix[i] = front[i].ratio(), arg[i] = front[i].mask;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!out.empty() && out.back().ratio == suffix[i]) {
        out.back().u_end = front[i].u;
        continue;
      }
      out.push_back({front[i].u, suffix[i], arg[i]});
    }
    return out;
  }

  double max_u() const { return front.empty() ? 0.0 : front.back().u; }
};

enum class SetMode { Exhaustive, SampledSets };

struct ConductanceOptions {
  SetMode mode = SetMode::Exhaustive;
  std::size_t samples = 100000;  ///< SampledSets only
  std::uint64_t seed = 42;
  unsigned parallelism = 1;
  int max_exhaustive_states = 20;
};

namespace detail {

inline bool dominates(const SetPoint& a, const SetPoint& b) {
  return a.u >= b.u && a.flow <= b.flow;
}

/// Pareto front with deterministic tie-breaking (smallest mask wins among equal points).
inline std::vector<SetPoint> pareto_front(std::vector<SetPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const SetPoint& a, const SetPoint& b) {
    if (a.u != b.u) return a.u > b.u;
    if (a.flow != b.flow) return a.flow < b.flow;
    return a.mask < b.mask;
  });
  std::vector<SetPoint> out;
  double best_flow = kInf;
  for (const auto& p : pts) {
    if (p.flow < best_flow) {
      out.push_back(p);
      best_flow = p.flow;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

struct SetAccumulator {
  std::vector<SetPoint> pts;
  void add(const SetPoint& p) {
    if (!(p.u > 0.0)) return;
    pts.push_back(p);
    if (pts.size() >= 8192) pts = pareto_front(std::move(pts));
  }
  std::vector<SetPoint> finish() { return pareto_front(std::move(pts)); }
};

inline SetPoint set_point_from_scratch(const Matrix& F, const Vector& mu, std::uint64_t mask) {
  const int n = int(mu.size());
  double mass = 0.0, flow = 0.0;
  for (int x = 0; x < n; ++x) {
    if (!((mask >> x) & 1u)) continue;
    mass += mu(x);
    for (int y = 0; y < n; ++y)
      if (!((mask >> y) & 1u)) flow += F(x, y);
  }
  double u = mass * (1.0 - mass);
  return {u, flow, mask};
}

}  // namespace detail

/// Weak-conductance profile.  Exhaustive mode walks all 2^(n-1) - 1 sets avoiding the last
/// state (complements share u and flow) in Gray-code order, in fixed-size blocks that are
/// recomputed from scratch at their start; results are merged in block order, so the output
/// does not depend on the thread count.
inline ConductanceProfile weak_conductance(const FiniteKernel& k, const ConductanceOptions& opt = {}) {
  const int n = k.size();
  const Vector& mu = k.mu();
  const Matrix F = mu.asDiagonal() * k.P();
  ConductanceProfile prof;
  prof.states = n;
  if (n < 2) return prof;

  if (opt.mode == SetMode::SampledSets) {
    if (n > 63) fail(ErrorKind::TooLarge, "sampled sets support at most 63 states");
    std::mt19937_64 rng(opt.seed);
    detail::SetAccumulator acc;
    std::uint64_t full = (n == 64) ? ~0ull : ((1ull << n) - 1);
    for (std::size_t i = 0; i < opt.samples; ++i) {
      std::uint64_t mask = rng() & full;
      if (mask == 0 || mask == full) continue;
      acc.add(detail::set_point_from_scratch(F, mu, mask));
    }
    prof.front = acc.finish();
    prof.exact = false;
    return prof;
  }

  if (n > opt.max_exhaustive_states)
    fail(ErrorKind::TooLarge, std::to_string(n) + " states exceed the exhaustive limit of " +
                                   std::to_string(opt.max_exhaustive_states));
  const int bits = n - 1;
  const std::uint64_t total = 1ull << bits;
  const int block_bits = std::min(bits, 12);
  const std::uint64_t block = 1ull << block_bits;
  const std::uint64_t nblocks = total / block;
  std::vector<std::vector<SetPoint>> results(nblocks);

  auto run_block = [&](std::uint64_t b) {
    detail::SetAccumulator acc;
    std::uint64_t i0 = b * block;
    std::uint64_t mask = i0 ^ (i0 >> 1);
    SetPoint cur = detail::set_point_from_scratch(F, mu, mask);
    double mass = 0.0;
    for (int x = 0; x < n; ++x)
      if ((mask >> x) & 1u) mass += mu(x);
    double flow = cur.flow;
    if (mask != 0) acc.add({mass * (1.0 - mass), flow, mask});
    for (std::uint64_t i = i0 + 1; i < i0 + block; ++i) {
      int kbit = __builtin_ctzll(i);
      bool adding = !((mask >> kbit) & 1u);
      double out_k = 0.0, in_k = 0.0;  // flow from k to A^c, and from A to k
      for (int y = 0; y < n; ++y) {
        if (y == kbit) continue;
        if ((mask >> y) & 1u)
          in_k += F(y, kbit);
        else
          out_k += F(kbit, y);
      }
      if (adding) {
        flow += out_k - in_k;
        mass += mu(kbit);
        mask |= (1ull << kbit);
      } else {
        flow += in_k - out_k;
        mass -= mu(kbit);
        mask &= ~(1ull << kbit);
      }
      acc.add({mass * (1.0 - mass), std::max(flow, 0.0), mask});
    }
    results[b] = acc.finish();
  };

  for_each_block(nblocks, opt.parallelism, run_block);
  std::vector<SetPoint> all;
  for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
  prof.front = detail::pareto_front(std::move(all));
  return prof;
}

inline std::vector<int> mask_states(std::uint64_t mask, int n) {
  std::vector<int> s;
  for (int i = 0; i < n; ++i)
    if ((mask >> i) & 1u) s.push_back(i);
  return s;
}

// ---------------------------------------------------------------------------------------------
// Cheeger-type inequalities

/// alpha(r) = 16 / kappa(r/16)^2, cut to zero from a_bound on.  The result is exact: kappa is a
/// step function, so alpha is tabulated at its jumps.
inline WpiCertificate cheeger_wpi(const ConductanceProfile& prof, double a_bound = 1.0, std::string kernel = "P") {
  auto bps = prof.breakpoints();
  if (bps.empty()) fail(ErrorKind::InvalidInput, "conductance profile is empty");
  if (bps.front().ratio <= 0.0)
    fail(ErrorKind::ZeroConductance, "a set with positive variance has zero flow: the kernel is reducible");
  std::vector<double> grid{kTiny}, vals;
  for (std::size_t i = 0; i < bps.size(); ++i) {
    vals.push_back(16.0 / (bps[i].ratio * bps[i].ratio));
    if (i + 1 < bps.size()) grid.push_back(16.0 * bps[i].u_end);
  }
  double cutoff = std::min(16.0 * bps.back().u_end, a_bound);
  MonotoneRate alpha(Tabulated{grid, vals, TabMode::Step}, 0.0, kInf, cutoff);
  WpiCertificate c = alpha_certificate(alpha, a_bound, prof.exact ? "cheeger" : "cheeger(sampled)", kernel);
  return c;
}

inline WpiCertificate cheeger_wpi(const FiniteKernel& k, const ConductanceOptions& opt = {}, double a_bound = 1.0) {
  return cheeger_wpi(weak_conductance(k, opt), a_bound);
}

struct ConverseCheck {
  double r = 0.0;
  double inv_alpha = 0.0;   ///< 1/alpha(r)
  double middle = 0.0;      ///< inf_{u>1} kappa(u r) u/(u-1)
  double upper = 0.0;       ///< 2 kappa(2r)
  bool ok = true;
};

/// 1/alpha(r) <= inf_{u>1} kappa(ur) u/(u-1) <= 2 kappa(2r): any valid alpha must obey this.
inline std::vector<ConverseCheck> cheeger_converse(const WpiCertificate& alpha_cert, const ConductanceProfile& prof,
                                                   const std::vector<double>& r_grid, double rel_tol = 1e-12) {
  if (alpha_cert.param != Parametrization::Alpha) fail(ErrorKind::InvalidCertificate, "expected an alpha certificate");
  std::vector<ConverseCheck> out;
  for (double r : r_grid) {
    ConverseCheck c;
    c.r = r;
    double a = alpha_cert.rate(r);
    c.inv_alpha = a > 0.0 ? 1.0 / a : kInf;
    // kappa(ur) u/(u-1) only changes at the front's u values; check those and a u grid.
    double best = kInf;
    for (const auto& p : prof.front) {
      double u = p.u / r;
      if (!(u > 1.0)) continue;
      // just below a jump kappa still takes the larger set; evaluate at u slightly less than p.u/r
      double uu = std::nextafter(u, 1.0);
      if (uu > 1.0) best = std::min(best, prof.kappa(uu * r) * uu / (uu - 1.0));
    }
    for (double u : log_grid(1.0 + 1e-6, 1e6, 400)) best = std::min(best, prof.kappa(u * r) * u / (u - 1.0));
    c.middle = best;
    c.upper = 2.0 * prof.kappa(2.0 * r);
    auto le = [&](double x, double y) { return !std::isfinite(y) || x <= y * (1.0 + rel_tol) + 1e-300; };
    c.ok = le(c.inv_alpha, c.middle) && le(c.middle, c.upper);
    out.push_back(c);
  }
  return out;
}

/// alpha-hat(r) = sup over the indicator front of (u_A - r)/flow_A, floored at 0: a lower bound
/// on the optimal alpha* obtained from indicators only.
inline double alpha_hat_indicators(const ConductanceProfile& prof, double r) {
  double best = 0.0;
  for (const auto& p : prof.front) {
    if (p.u <= r) continue;
    if (p.flow <= 0.0) return kInf;
    best = std::max(best, (p.u - r) / p.flow);
  }
  return best;
}

// ---------------------------------------------------------------------------------------------
// lower bounds on the optimal beta*

/// One candidate line s -> intercept - slope*s, from an observable normalised to Phi = 1.
struct CandidateLine {
  double intercept;  ///< ||f - mu f||^2 / Phi(f)
  double slope;      ///< E(T,f) / Phi(f)
};

namespace detail {

/// Exact knots of s -> max(0, max_j (c_j - d_j s)) for s >= 0.
inline std::pair<std::vector<double>, std::vector<double>> lower_envelope_knots(const std::vector<CandidateLine>& lines) {
  auto value = [&](double s) {
    double best = 0.0;
    for (const auto& l : lines) best = std::max(best, l.intercept - l.slope * s);
    return best;
  };
  std::vector<double> xs{0.0};
  double s = 0.0;
  // Walk right: at each knot find the active line, then the next crossing.
  for (int guard = 0; guard < 100000; ++guard) {
    double v = value(s);
    if (v <= 0.0) break;
    // active line at s+ : among lines attaining v, smallest slope
    const CandidateLine* act = nullptr;
    for (const auto& l : lines) {
      double lv = l.intercept - l.slope * s;
      if (std::abs(lv - v) <= 1e-14 * std::max(1.0, v))
        if (!act || l.slope < act->slope) act = &l;
    }
    if (!act || act->slope <= 0.0) {
      xs.push_back(kInf);
      break;
    }
    double next = act->intercept / act->slope;  // zero crossing
    for (const auto& l : lines) {
      if (l.slope >= act->slope) continue;
      double c = (l.intercept - act->intercept) / (l.slope - act->slope);
      if (c > s * (1.0 + 1e-15) && c < next) next = c;
    }
    xs.push_back(next);
    s = next;
  }
  std::vector<double> ys;
  for (double x : xs) ys.push_back(std::isfinite(x) ? value(x) : 0.0);
  return {xs, ys};
}

}  // namespace detail

inline std::vector<CandidateLine> indicator_lines(const ConductanceProfile& prof) {
  std::vector<CandidateLine> lines;
  for (const auto& p : prof.front) lines.push_back({p.u, p.flow});
  return lines;
}

inline std::vector<CandidateLine> observable_lines(const FiniteKernel& T, const std::vector<Vector>& candidates) {
  std::vector<CandidateLine> lines;
  for (const auto& f : candidates) {
    Observable o(f, T.mu());
    if (!(o.osc > 0.0)) continue;
    double phi = o.osc_sq();  // normalise so that Phi(f) = 1
    lines.push_back({o.variance / phi, dirichlet_form(T, f) / phi});
  }
  return lines;
}

/// max over candidates of (||f||^2 - s E(T,f))_+ with Phi(f) = 1: a lower bound on beta*(s).
/// The envelope is piecewise linear, so it is returned exactly as a linear table whose knots
/// include both `s_grid` and every kink.
inline MonotoneRate beta_star_lower(const std::vector<CandidateLine>& lines, const std::vector<double>& s_grid) {
  if (lines.empty()) fail(ErrorKind::InvalidInput, "no candidate observables");
  auto [kx, ky] = detail::lower_envelope_knots(lines);
  auto value = [&](double s) {
    double best = 0.0;
    for (const auto& l : lines) best = std::max(best, l.intercept - l.slope * s);
    return best;
  };
  std::vector<double> grid;
  for (double s : s_grid)
    if (s > 0.0 && std::isfinite(s)) grid.push_back(s);
  for (double s : kx)
    if (s > 0.0 && std::isfinite(s)) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> vals;
  for (double s : grid) vals.push_back(value(s));
  for (std::size_t i = 1; i < vals.size(); ++i) vals[i] = std::min(vals[i], vals[i - 1]);
  return MonotoneRate::tabulated(std::move(grid), std::move(vals), TabMode::Linear);
}

inline MonotoneRate beta_star_lower(const FiniteKernel& T, const std::vector<Vector>& candidates,
                                    const std::vector<double>& s_grid, bool exhaustive_indicators = true,
                                    const ConductanceOptions& opt = {}) {
  auto lines = observable_lines(T, candidates);
  if (exhaustive_indicators) {
    auto ind = indicator_lines(weak_conductance(T, opt));
    lines.insert(lines.end(), ind.begin(), ind.end());
  }
  return beta_star_lower(lines, s_grid);
}

/// psi(t) = inf{ E(T,f)/||f||^2 : Phi(f) = 1, ||f||^2 > t } over a candidate family, and the
/// resulting bracket 1/(2 psi(2r)) <= alpha*(r) <= 1/psi(r).  Restricting the family can only
/// raise psi, so the lower end stays valid while the upper end is indicative.
struct PsiSandwich {
  double r, psi_r, psi_2r, lower, upper, alpha_hat;
};

inline double psi_over(const std::vector<CandidateLine>& lines, double t) {
  double best = kInf;
  for (const auto& l : lines)
    if (l.intercept > t) best = std::min(best, l.slope / l.intercept);
  return best;
}

inline std::vector<PsiSandwich> psi_sandwich(const std::vector<CandidateLine>& lines, const std::vector<double>& r_grid) {
  std::vector<PsiSandwich> out;
  for (double r : r_grid) {
    PsiSandwich p{};
    p.r = r;
    p.psi_r = psi_over(lines, r);
    p.psi_2r = psi_over(lines, 2.0 * r);
    p.lower = std::isfinite(p.psi_2r) ? 1.0 / (2.0 * p.psi_2r) : 0.0;
    p.upper = std::isfinite(p.psi_r) ? 1.0 / p.psi_r : 0.0;
    double a = 0.0;
    for (const auto& l : lines)
      if (l.intercept > r) a = std::max(a, (l.intercept - r) / l.slope);
    p.alpha_hat = a;
    out.push_back(p);
  }
  return out;
}

}  // namespace wpi
