#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wpi/error.hpp"

namespace wpi {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Smallest argument used where a rate needs a concrete "just above zero" point.
inline constexpr double kTiny = 1e-300;

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  long max_intervals = 1L << 20;
};

namespace detail {

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
  int depth;
};

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace detail

/// Adaptive Simpson on [a,b]; throws NumericalFailure once the interval cap is hit.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               const QuadratureOptions& opt = {}) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, opt);
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  std::vector<detail::SimpsonPanel> stack;
  stack.push_back({a, b, fa, fm, fb, detail::simpson(a, b, fa, fm, fb), 0});
  double total = 0.0;
  long intervals = 1;
  // Tolerance is shared out proportionally to panel width.
  const double width = b - a;
  while (!stack.empty()) {
    auto p = stack.back();
    stack.pop_back();
    double m = 0.5 * (p.a + p.b);
    double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
    double flm = f(lm), frm = f(rm);
    double left = detail::simpson(p.a, m, p.fa, flm, p.fm);
    double right = detail::simpson(m, p.b, p.fm, frm, p.fb);
    double delta = left + right - p.whole;
    double tol = std::max(opt.abs_tol * (p.b - p.a) / width, opt.rel_tol * std::abs(left + right));
    if (!std::isfinite(delta)) fail(ErrorKind::NumericalFailure, "non-finite integrand");
    if (std::abs(delta) <= 15.0 * tol || p.depth > 60) {
      total += left + right + delta / 15.0;
      continue;
    }
    if (++intervals > opt.max_intervals)
      fail(ErrorKind::NumericalFailure, "adaptive quadrature exceeded interval cap");
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, p.depth + 1});
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, p.depth + 1});
  }
  return total;
}

/// Integral of g over [lo,hi] (0 < lo < hi) computed in the variable u = log v.
inline double integrate_log(const std::function<double(double)>& g, double lo, double hi,
                            const QuadratureOptions& opt = {}) {
  if (lo == hi) return 0.0;
  auto h = [&](double u) {
    double v = std::exp(u);
    return g(v) * v;
  };
  return adaptive_simpson(h, std::log(lo), std::log(hi), opt);
}

/// Smallest x in [lo,hi] with pred(x) true, assuming pred is monotone false->true.
inline double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi,
                               double rel_tol = 1e-14, int max_iter = 300) {
  for (int i = 0; i < max_iter && hi - lo > rel_tol * std::max(std::abs(hi), 1e-300); ++i) {
    double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Golden-section maximisation of a unimodal f on [lo,hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-12, int max_iter = 200) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && std::abs(hi - lo) > tol * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0) || !std::isfinite(y[i])) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) fail(ErrorKind::NumericalFailure, "slope needs two positive points");
  double den = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / den;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// 17 significant digits, with "inf"/"-inf"/"nan" spelled out.
inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline bool approx_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace wpi
