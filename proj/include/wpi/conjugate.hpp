#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "wpi/monotone_rate.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

/// Continuous piecewise-linear nondecreasing function on [0, end] given by knots.
/// Beyond the last knot it is +inf when `end` is finite, otherwise extended with `tail_slope`.
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> y;
  double tail_slope = 0.0;
  bool infinite_beyond = true;

  double operator()(double v) const {
    if (v <= x.front()) return y.front();
    if (v > x.back()) return infinite_beyond ? kInf : y.back() + tail_slope * (v - x.back());
    auto it = std::upper_bound(x.begin(), x.end(), v);
    std::size_t j = std::size_t(it - x.begin());
    if (j >= x.size()) return y.back();
    std::size_t i = j - 1;
    double w = (v - x[i]) / (x[j] - x[i]);
    return y[i] + w * (y[j] - y[i]);
  }
};

namespace detail {

struct Line {
  double m, q;  // m*v + q
};

/// Knots of max(0, max_i line_i) over [0, vmax] (vmax may be +inf).
inline PiecewiseLinear upper_envelope(std::vector<Line> lines, double vmax) {
  lines.push_back({0.0, 0.0});
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.m < b.m || (a.m == b.m && a.q > b.q);
  });
  std::vector<Line> dedup;
  for (const auto& l : lines)
    if (dedup.empty() || l.m != dedup.back().m) dedup.push_back(l);
  auto cross = [](const Line& a, const Line& b) { return (a.q - b.q) / (b.m - a.m); };
  std::vector<Line> hull;
  for (const auto& l : dedup) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back()))
      hull.pop_back();
    hull.push_back(l);
  }
  PiecewiseLinear pl;
  auto value = [&](double v) {
    double best = 0.0;
    for (const auto& l : hull) best = std::max(best, l.m * v + l.q);
    return best;
  };
  pl.x.push_back(0.0);
  pl.y.push_back(value(0.0));
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    double c = cross(hull[i], hull[i + 1]);
    if (c > pl.x.back() && c < vmax) {
      pl.x.push_back(c);
      pl.y.push_back(value(c));
    }
  }
  if (std::isfinite(vmax)) {
    if (vmax > pl.x.back()) {
      pl.x.push_back(vmax);
      pl.y.push_back(value(vmax));
    }
    pl.infinite_beyond = true;
  } else {
    pl.infinite_beyond = false;
    pl.tail_slope = hull.back().m;
    // The last knot may sit before the final crossing; the tail line is the top hull line.
    double v_last = pl.x.back();
    pl.y.back() = value(v_last);
  }
  // Enforce monotonicity against round-off in the crossings.
  for (std::size_t i = 1; i < pl.y.size(); ++i) pl.y[i] = std::max(pl.y[i], pl.y[i - 1]);
  return pl;
}

}  // namespace detail

/// The transform K*(v) = sup_{t>0} (v - beta(t)) / t, with K(u) = u beta(1/u) as its conjugate pair.
/// K* is nondecreasing and convex; it is +inf past sup(beta).
class ConjugateRate {
 public:
  enum class Kind { Power, Piecewise, Numeric };

  ConjugateRate() = default;

  /// kappa * v^expo on [0, vmax], +inf beyond.
  static ConjugateRate power(double kappa, double expo, double vmax) {
    ConjugateRate k;
    k.kind_ = Kind::Power;
    k.kappa_ = kappa;
    k.expo_ = expo;
    k.vmax_ = vmax;
    return k;
  }

  static ConjugateRate piecewise(PiecewiseLinear pl) {
    ConjugateRate k;
    k.kind_ = Kind::Piecewise;
    k.vmax_ = pl.infinite_beyond ? pl.x.back() : kInf;
    k.pl_ = std::make_shared<PiecewiseLinear>(std::move(pl));
    return k;
  }

  static ConjugateRate numeric(MonotoneRate beta) {
    ConjugateRate k;
    k.kind_ = Kind::Numeric;
    k.vmax_ = beta.sup();
    k.beta_ = std::make_shared<MonotoneRate>(std::move(beta));
    return k;
  }

  Kind kind() const { return kind_; }
  double vmax() const { return vmax_; }
  double power_coefficient() const { return kappa_; }
  double power_exponent() const { return expo_; }
  const PiecewiseLinear& knots() const { return *pl_; }

  double operator()(double v) const {
    if (v < 0.0) fail(ErrorKind::DomainError, "K* is defined on v >= 0");
    if (v > vmax_) return kInf;
    if (v == 0.0) return 0.0;
    switch (kind_) {
      case Kind::Power: return kappa_ * std::pow(v, expo_);
      case Kind::Piecewise: return (*pl_)(v);
      case Kind::Numeric: return numeric_sup(v);
    }
    return kInf;
  }

  /// A piecewise-linear minorant of K* (exact for the power and piecewise kinds up to the
  /// closed form).  Numeric K* is replaced by the envelope of the lines (v - beta(t))/t over a
  /// dense t grid, which can only undershoot and so keeps every downstream bound conservative.
  const PiecewiseLinear& integration_knots() const {
    if (kind_ == Kind::Piecewise) return *pl_;
    if (!pl_) pl_ = std::make_shared<PiecewiseLinear>(build_minorant());
    return *pl_;
  }

  /// F_a(x) = int_x^a dv / K*(v).
  double F(double x, double a) const {
    if (!(x > 0.0)) return kInf;
    if (x >= a) return 0.0;
    if (kind_ == Kind::Power) {
      double hi = std::min(a, vmax_);
      if (x >= hi) return 0.0;
      double e1 = expo_ - 1.0;
      if (std::abs(e1) < 1e-15) return std::log(hi / x) / kappa_;
      return (std::pow(x, -e1) - std::pow(hi, -e1)) / (kappa_ * e1);
    }
    return piecewise_F(integration_knots(), x, a);
  }

  /// gamma(n) = F_a^{-1}(n) for n = 0..n_max, with gamma(0) = a.
  std::vector<double> gamma(std::size_t n_max, double a) const {
    std::vector<double> g(n_max + 1);
    g[0] = a;
    if (kind_ == Kind::Power) {
      double hi = std::min(a, vmax_);
      double e1 = expo_ - 1.0;
      for (std::size_t n = 1; n <= n_max; ++n) {
        double t = double(n);
        if (std::abs(e1) < 1e-15)
          g[n] = hi * std::exp(-kappa_ * t);
        else
          g[n] = std::pow(t * kappa_ * e1 + std::pow(hi, -e1), -1.0 / e1);
      }
      return g;
    }
    piecewise_gamma(integration_knots(), a, g);
    return g;
  }

  /// B(v) = int_0^v w / K*(w) dw; +inf when the integral diverges at 0.
  double B(double v) const {
    if (v <= 0.0) return 0.0;
    if (kind_ == Kind::Power) {
      double hi = std::min(v, vmax_);
      double e = 2.0 - expo_;  // integrand w^(1-expo)/kappa
      if (e <= 0.0) return kInf;
      return std::pow(hi, e) / (kappa_ * e);
    }
    const auto& pl = integration_knots();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pl.x.size() && pl.x[i] < v; ++i) {
      double lo = pl.x[i], hi = std::min(pl.x[i + 1], v);
      double y0 = pl.y[i], y1 = pl(hi);
      double s = (pl.y[i + 1] - pl.y[i]) / (pl.x[i + 1] - pl.x[i]);
      double q = y0 - s * lo;  // K* = q + s w on this piece
      if (y0 <= 0.0) {
        // Only a ray through the origin keeps w / K* bounded at the left end.
        if (!(lo == 0.0 && q == 0.0 && s > 0.0)) return kInf;
      }
      if (s == 0.0) {
        total += (hi * hi - lo * lo) / (2.0 * q);
      } else if (q == 0.0) {
        total += (hi - lo) / s;
      } else {
        total += (hi - lo) / s - q / (s * s) * std::log(y1 / y0);
      }
    }
    if (v > pl.x.back() && !pl.infinite_beyond) {
      double lo = pl.x.back(), y0 = pl.y.back(), s = pl.tail_slope;
      double q = y0 - s * lo;
      double y1 = y0 + s * (v - lo);
      if (y0 <= 0.0) return kInf;
      if (s == 0.0)
        total += (v * v - lo * lo) / (2.0 * q);
      else
        total += (v - lo) / s - q / (s * s) * std::log(y1 / y0);
    }
    return total;
  }

 private:
  double numeric_sup(double v) const {
    const MonotoneRate& b = *beta_;
    auto obj = [&](double logt) {
      double t = std::exp(logt);
      return (v - b(t)) / t;
    };
    const double lo = std::log(1e-15), hi = std::log(1e15);
    const int n = 601;
    double best = 0.0;
    int arg = -1;
    for (int i = 0; i < n; ++i) {
      double u = lo + (hi - lo) * i / (n - 1);
      double val = obj(u);
      if (val > best) {
        best = val;
        arg = i;
      }
    }
    if (arg < 0) return 0.0;
    if (arg == 0 || arg == n - 1)
      fail(ErrorKind::NumericalFailure, "K* maximiser not bracketed at v=" + fmt17(v));
    double step = (hi - lo) / (n - 1);
    double ustar = golden_max(obj, lo + (arg - 1) * step, lo + (arg + 1) * step, 1e-15);
    return std::max({best, obj(ustar), 0.0});
  }

  PiecewiseLinear build_minorant() const {
    std::vector<detail::Line> lines;
    if (kind_ == Kind::Power) {
      // Tangent lines of kappa v^expo; used only by callers asking for knots explicitly.
      for (double v : log_grid(1e-12, std::isfinite(vmax_) ? vmax_ : 1e6, 2048)) {
        double val = kappa_ * std::pow(v, expo_), d = kappa_ * expo_ * std::pow(v, expo_ - 1.0);
        lines.push_back({d, val - d * v});
      }
      return detail::upper_envelope(lines, vmax_);
    }
    const MonotoneRate& b = *beta_;
    double sup_b = vmax_;
    for (double t : log_grid(1e-12, 1e12, 64 * 24 + 1)) {
      double bt = b(t);
      if (!(bt < sup_b) || !std::isfinite(bt)) continue;
      lines.push_back({1.0 / t, -bt / t});
    }
    if (std::isfinite(b.cutoff())) lines.push_back({1.0 / b.cutoff(), 0.0});
    return detail::upper_envelope(lines, vmax_);
  }

  static double piece_integral(double lo, double hi, double y0, double y1) {
    // int_lo^hi dv / (linear from y0 to y1)
    if (y0 <= 0.0) return kInf;
    if (y1 == y0) return (hi - lo) / y0;
    double s = (y1 - y0) / (hi - lo);
    return std::log(y1 / y0) / s;
  }

  static double piecewise_F(const PiecewiseLinear& pl, double x, double a) {
    double total = 0.0;
    double top = a;
    if (pl.infinite_beyond) top = std::min(top, pl.x.back());
    if (x >= top) return 0.0;
    if (!pl.infinite_beyond && top > pl.x.back()) {
      double lo = std::max(x, pl.x.back());
      total += piece_integral(lo, top, pl(lo), pl(top));
      top = lo;
      if (x >= top) return total;
    }
    auto it = std::upper_bound(pl.x.begin(), pl.x.end(), x);
    std::size_t i = std::size_t(it - pl.x.begin()) - 1;
    for (; i + 1 < pl.x.size() && pl.x[i] < top; ++i) {
      double lo = std::max(pl.x[i], x), hi = std::min(pl.x[i + 1], top);
      if (hi <= lo) continue;
      double y0 = pl(lo), y1 = pl(hi);
      total += piece_integral(lo, hi, y0, y1);
      if (!std::isfinite(total)) return kInf;
    }
    return total;
  }

  /// March down from a, consuming one unit of F per step; exact on each linear piece.
  static void piecewise_gamma(const PiecewiseLinear& pl, double a, std::vector<double>& g) {
    double top = a;
    if (pl.infinite_beyond) top = std::min(top, pl.x.back());
    // Pieces sorted from the top down: [lo_k, hi_k] with K* linear.
    struct Piece {
      double lo, hi, ylo, yhi;
    };
    std::vector<Piece> pieces;
    if (!pl.infinite_beyond && top > pl.x.back())
      pieces.push_back({pl.x.back(), top, pl.y.back(), pl(top)});
    for (std::size_t i = pl.x.size() - 1; i-- > 0;) {
      double lo = pl.x[i], hi = std::min(pl.x[i + 1], top);
      if (hi <= lo) continue;
      pieces.push_back({lo, hi, pl.y[i], pl(hi)});
    }
    std::size_t k = 0;
    double cur = top;  // current position, F(cur) = consumed
    double consumed = 0.0;
    for (std::size_t n = 1; n < g.size(); ++n) {
      double target = double(n);
      while (k < pieces.size()) {
        const auto& p = pieces[k];
        double ycur = p.ylo + (p.yhi - p.ylo) * (cur - p.lo) / (p.hi - p.lo);
        double need = target - consumed;
        double avail = piece_integral(p.lo, cur, p.ylo, ycur);
        if (avail >= need) {
          // Solve int_x^cur dv/K = need on this piece.
          double s = (p.yhi - p.ylo) / (p.hi - p.lo);
          double x;
          if (s == 0.0) {
            x = cur - need * ycur;
          } else {
            double yx = ycur * std::exp(-s * need);
            x = p.lo + (yx - p.ylo) / s;
          }
          x = std::clamp(x, p.lo, cur);
          consumed = target;
          cur = x;
          break;
        }
        consumed += avail;
        cur = p.lo;
        ++k;
      }
      if (k >= pieces.size()) {
        // Ran out of pieces: the remaining budget is absorbed at the bottom knot.
        cur = pieces.empty() ? 0.0 : pieces.back().lo;
      }
      g[n] = cur;
    }
  }

  Kind kind_ = Kind::Power;
  double kappa_ = 0.0;
  double expo_ = 1.0;
  double vmax_ = kInf;
  std::shared_ptr<MonotoneRate> beta_;
  mutable std::shared_ptr<PiecewiseLinear> pl_;
};

/// Lines (v - b)/t for a tabulated/constant beta, with cap, cutoff and floor applied.  The
/// envelope of these lines is K* exactly: on each step (or linear piece) the ratio is monotone
/// in t, so its supremum sits at a knot.
inline ConjugateRate conjugate_of_table(const MonotoneRate& beta) {
  std::vector<double> grid, vals;
  if (beta.is<Tabulated>()) {
    grid = beta.as<Tabulated>().grid;
    vals = beta.as<Tabulated>().values;
  } else {
    grid = {kTiny};
    vals = {beta.as<Constant>().c};
  }
  const double vmax = beta.sup();
  std::vector<detail::Line> lines;
  auto add = [&](double t, double b) {
    b = std::min(b, beta.cap());
    if (!(b < vmax) || !(t > 0.0)) return;
    lines.push_back({1.0 / t, -b / t});
  };
  if (beta.floor() > 0.0) add(beta.floor(), beta(beta.floor()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < beta.floor() || grid[i] >= beta.cutoff()) continue;
    add(grid[i], vals[i]);
  }
  if (std::isfinite(beta.cutoff())) lines.push_back({1.0 / beta.cutoff(), 0.0});
  return ConjugateRate::piecewise(detail::upper_envelope(lines, vmax));
}

/// K* for a given beta: closed form for plain power laws, exact envelope for tables and
/// constants, golden-section search otherwise.
inline ConjugateRate k_transform(const MonotoneRate& beta) {
  if (beta.is<PowerLaw>() && beta.floor() == 0.0 && !std::isfinite(beta.cutoff())) {
    const auto& pw = beta.as<PowerLaw>();
    if (pw.c == 0.0) return ConjugateRate::power(kInf, 1.0, 0.0);
    double p = pw.p;
    double kappa = p / (1.0 + p) * std::pow(pw.c * (1.0 + p), -1.0 / p);
    return ConjugateRate::power(kappa, (1.0 + p) / p, beta.sup());
  }
  if (beta.is<Tabulated>() || beta.is<Constant>()) return conjugate_of_table(beta);
  return ConjugateRate::numeric(beta);
}

}  // namespace wpi
