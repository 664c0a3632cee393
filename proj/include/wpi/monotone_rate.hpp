#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "wpi/error.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

/// c * s^(-p)
struct PowerLaw {
  double c = 1.0;
  double p = 1.0;
};

/// c * exp(-lambda * s^theta)
struct ExpPower {
  double c = 1.0;
  double lambda = 1.0;
  double theta = 1.0;
};

/// (max(0, log(c/s)) / lambda)^(1/theta); the generalized inverse of ExpPower.
struct LogPower {
  double c = 1.0;
  double lambda = 1.0;
  double theta = 1.0;
};

struct Constant {
  double c = 0.0;
};

enum class TabMode { Step, Linear };

/// Nonincreasing table. Step mode is right-continuous: values[i] holds on [grid[i], grid[i+1]).
/// Linear mode interpolates, except across an infinite value where it falls back to the step rule.
/// Arguments below grid[0] take values[0]; arguments past the end take values.back().
struct Tabulated {
  std::vector<double> grid;
  std::vector<double> values;
  TabMode mode = TabMode::Step;
};

/// A nonincreasing function (0,inf) -> [0,inf].
///
/// The base form is post-processed in this order: arguments below `floor` are clamped up to it,
/// the value is capped at `cap`, and anything at or beyond `cutoff` is forced to zero.  These
/// three knobs make the family closed under the generalized inverse
/// g(x) = inf{ y > 0 : f(y) <= x } (with inf of the empty set = +inf).
class MonotoneRate {
 public:
  using Form = std::variant<PowerLaw, ExpPower, LogPower, Constant, Tabulated>;

  MonotoneRate() : form_(Constant{0.0}) {}
  explicit MonotoneRate(Form form, double floor = 0.0, double cap = kInf, double cutoff = kInf)
      : form_(std::move(form)), floor_(floor), cap_(cap), cutoff_(cutoff) {
    validate();
  }

  static MonotoneRate power_law(double c, double p) { return MonotoneRate(PowerLaw{c, p}); }
  static MonotoneRate exp_power(double c, double lambda, double theta) {
    return MonotoneRate(ExpPower{c, lambda, theta});
  }
  static MonotoneRate constant(double c) { return MonotoneRate(Constant{c}); }
  static MonotoneRate tabulated(std::vector<double> grid, std::vector<double> values,
                                TabMode mode = TabMode::Step) {
    return MonotoneRate(Tabulated{std::move(grid), std::move(values), mode});
  }

  const Form& form() const { return form_; }
  double floor() const { return floor_; }
  double cap() const { return cap_; }
  double cutoff() const { return cutoff_; }

  MonotoneRate with_cap(double cap) const {
    MonotoneRate r = *this;
    r.cap_ = std::min(cap_, cap);
    return r;
  }
  MonotoneRate with_cutoff(double cutoff) const {
    MonotoneRate r = *this;
    r.cutoff_ = std::min(cutoff_, cutoff);
    return r;
  }
  MonotoneRate with_floor(double floor) const {
    MonotoneRate r = *this;
    r.floor_ = floor;
    return r;
  }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(form_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(form_);
  }

  /// Value of the unmodified base form.
  double base(double s) const {
    return std::visit([s](const auto& f) { return eval_form(f, s); }, form_);
  }

  double operator()(double s) const {
    if (s >= cutoff_) return 0.0;
    double v = base(std::max(s, floor_));
    return std::min(v, cap_);
  }

  /// lim_{s -> 0+} of the rate, i.e. its supremum.
  double sup() const {
    if (cutoff_ <= 0.0) return 0.0;
    double b = floor_ > 0.0 ? base(floor_) : std::visit([](const auto& f) { return base_at_zero(f); }, form_);
    return std::min(b, cap_);
  }

  /// lim_{s -> inf} of the rate.
  double limit_at_infinity() const {
    if (std::isfinite(cutoff_)) return 0.0;
    double b = std::visit([](const auto& f) { return base_at_infinity(f); }, form_);
    return std::min(b, cap_);
  }

  std::string describe() const;

 private:
  static double eval_form(const PowerLaw& f, double s) {
    if (f.c == 0.0) return 0.0;
    if (s <= 0.0) return kInf;
    return f.c * std::pow(s, -f.p);
  }
  static double eval_form(const ExpPower& f, double s) {
    return f.c * std::exp(-f.lambda * std::pow(std::max(s, 0.0), f.theta));
  }
  static double eval_form(const LogPower& f, double s) {
    if (s >= f.c) return 0.0;
    if (s <= 0.0) return kInf;
    return std::pow(std::log(f.c / s) / f.lambda, 1.0 / f.theta);
  }
  static double eval_form(const Constant& f, double) { return f.c; }
  static double eval_form(const Tabulated& t, double s) {
    const auto& g = t.grid;
    const auto& v = t.values;
    auto it = std::upper_bound(g.begin(), g.end(), s);
    if (it == g.begin()) return v.front();
    std::size_t i = std::size_t(it - g.begin()) - 1;
    if (t.mode == TabMode::Step || i + 1 == g.size()) return v[i];
    double v0 = v[i], v1 = v[i + 1];
    if (!std::isfinite(v0) || !std::isfinite(v1)) return v0;
    double w = (s - g[i]) / (g[i + 1] - g[i]);
    return v0 + w * (v1 - v0);
  }

  static double base_at_zero(const PowerLaw& f) { return f.c == 0.0 ? 0.0 : (f.p > 0 ? kInf : f.c); }
  static double base_at_zero(const ExpPower& f) { return f.c; }
  static double base_at_zero(const LogPower& f) { return f.c > 0.0 ? kInf : 0.0; }
  static double base_at_zero(const Constant& f) { return f.c; }
  static double base_at_zero(const Tabulated& t) { return t.values.front(); }

  static double base_at_infinity(const PowerLaw& f) { return f.p > 0 ? 0.0 : f.c; }
  static double base_at_infinity(const ExpPower&) { return 0.0; }
  static double base_at_infinity(const LogPower&) { return 0.0; }
  static double base_at_infinity(const Constant& f) { return f.c; }
  static double base_at_infinity(const Tabulated& t) { return t.values.back(); }

  void validate() const {
    if (!(floor_ >= 0.0) || !(cap_ >= 0.0) || !(cutoff_ > 0.0))
      fail(ErrorKind::InvalidInput, "rate modifiers must satisfy floor>=0, cap>=0, cutoff>0");
    std::visit([](const auto& f) { check_form(f); }, form_);
  }
  static void check_form(const PowerLaw& f) {
    if (!(f.c >= 0.0) || !(f.p > 0.0) || !std::isfinite(f.c))
      fail(ErrorKind::InvalidInput, "power law needs c>=0 and p>0");
  }
  static void check_form(const ExpPower& f) {
    if (!(f.c >= 0.0) || !(f.lambda > 0.0) || !(f.theta > 0.0))
      fail(ErrorKind::InvalidInput, "exp-power needs c>=0, lambda>0, theta>0");
  }
  static void check_form(const LogPower& f) {
    if (!(f.c > 0.0) || !(f.lambda > 0.0) || !(f.theta > 0.0))
      fail(ErrorKind::InvalidInput, "log-power needs c>0, lambda>0, theta>0");
  }
  static void check_form(const Constant& f) {
    if (!(f.c >= 0.0)) fail(ErrorKind::InvalidInput, "constant rate must be >= 0");
  }
  static void check_form(const Tabulated& t) {
    if (t.grid.empty() || t.grid.size() != t.values.size())
      fail(ErrorKind::InvalidInput, "tabulated rate needs matching non-empty grid and values");
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
      if (!(t.grid[i] > 0.0) || !std::isfinite(t.grid[i]))
        fail(ErrorKind::InvalidInput, "tabulated grid must be positive and finite");
      if (i > 0 && !(t.grid[i] > t.grid[i - 1]))
        fail(ErrorKind::InvalidInput, "tabulated grid must be strictly increasing");
      if (!(t.values[i] >= 0.0)) fail(ErrorKind::InvalidInput, "tabulated values must be >= 0");
      if (i > 0 && t.values[i] > t.values[i - 1])
        fail(ErrorKind::InvalidInput, "tabulated values must be nonincreasing");
    }
  }

  Form form_;
  double floor_ = 0.0;
  double cap_ = kInf;
  double cutoff_ = kInf;
};

inline std::string MonotoneRate::describe() const {
  std::string s = std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>)
          return "powerlaw(c=" + fmt17(f.c) + ",p=" + fmt17(f.p) + ")";
        else if constexpr (std::is_same_v<T, ExpPower>)
          return "exppower(c=" + fmt17(f.c) + ",lambda=" + fmt17(f.lambda) + ",theta=" + fmt17(f.theta) + ")";
        else if constexpr (std::is_same_v<T, LogPower>)
          return "logpower(c=" + fmt17(f.c) + ",lambda=" + fmt17(f.lambda) + ",theta=" + fmt17(f.theta) + ")";
        else if constexpr (std::is_same_v<T, Constant>)
          return "constant(" + fmt17(f.c) + ")";
        else
          return std::string("tabulated(") + (f.mode == TabMode::Step ? "step," : "linear,") +
                 std::to_string(f.grid.size()) + " points)";
      },
      form_);
  if (floor_ > 0.0) s += " floor=" + fmt17(floor_);
  if (std::isfinite(cap_)) s += " cap=" + fmt17(cap_);
  if (std::isfinite(cutoff_)) s += " cutoff=" + fmt17(cutoff_);
  return s;
}

namespace detail {

inline MonotoneRate::Form inverse_form(const PowerLaw& f) {
  if (f.c == 0.0) return Constant{0.0};
  return PowerLaw{std::pow(f.c, 1.0 / f.p), 1.0 / f.p};
}
inline MonotoneRate::Form inverse_form(const ExpPower& f) {
  if (f.c == 0.0) return Constant{0.0};
  return LogPower{f.c, f.lambda, f.theta};
}
inline MonotoneRate::Form inverse_form(const LogPower& f) { return ExpPower{f.c, f.lambda, f.theta}; }
// Valid only together with the cutoff at sup f that generalized_inverse installs.
inline MonotoneRate::Form inverse_form(const Constant& f) {
  return Constant{f.c == 0.0 ? 0.0 : kInf};
}

inline MonotoneRate::Form inverse_form(const Tabulated& t) {
  const auto& g = t.grid;
  const auto& v = t.values;
  std::vector<double> xs, ys;
  auto push = [&](double x, double y) {
    if (!xs.empty() && !(x > xs.back())) {
      // Same abscissa: keep the smaller inverse value, which is the right-continuous one.
      ys.back() = std::min(ys.back(), y);
      return;
    }
    xs.push_back(x);
    ys.push_back(y);
  };
  const std::size_t n = g.size();
  if (t.mode == TabMode::Step) {
    // Walk from the smallest value upwards; each distinct value u maps to the first grid
    // point at which the table drops to u.
    double smallest = v.back();
    if (smallest > kTiny) push(kTiny, kInf);
    for (std::size_t k = n; k-- > 0;) {
      double u = v[k];
      if (!(u < v.front()) || !std::isfinite(u)) continue;
      std::size_t first = std::size_t(std::lower_bound(v.begin(), v.end(), u, std::greater<double>()) - v.begin());
      push(std::max(u, kTiny), g[first]);
    }
    if (xs.empty()) push(kTiny, v.front() > kTiny ? kInf : g.front());
    return Tabulated{xs, ys, TabMode::Step};
  }
  double smallest = v.back();
  if (smallest > kTiny) push(kTiny, kInf);
  for (std::size_t k = n; k-- > 0;) {
    double u = v[k];
    if (!std::isfinite(u)) continue;
    std::size_t first = std::size_t(std::lower_bound(v.begin(), v.end(), u, std::greater<double>()) - v.begin());
    if (first != k) {
      // Flat stretch [g[first], g[k]]: the inverse jumps at u from about g[k] down to g[first].
      double below = std::nextafter(u, 0.0);
      if (k + 1 != n && below > kTiny && (xs.empty() || below > xs.back())) push(below, g[k]);
      push(std::max(u, kTiny), g[first]);
      k = first;
      continue;
    }
    push(std::max(u, kTiny), g[k]);
  }
  if (xs.size() == 1 && !std::isfinite(ys[0])) push(std::max(v.front(), 2 * kTiny), g.front());
  return Tabulated{xs, ys, TabMode::Linear};
}

}  // namespace detail

/// Generalized inverse g(x) = inf{ y > 0 : f(y) <= x }.  Exact for every supported form.
inline MonotoneRate generalized_inverse(const MonotoneRate& f) {
  MonotoneRate::Form base = std::visit([](const auto& b) { return detail::inverse_form(b); }, f.form());
  double sup_f = f.sup();
  double cutoff = sup_f > 0.0 ? sup_f : kTiny;
  return MonotoneRate(std::move(base), 0.0, f.cutoff(), cutoff);
}

/// Pointwise numerical inverse by bisection; used to cross-check the closed forms.
inline double generalized_inverse_at(const std::function<double(double)>& f, double x,
                                     double lo = 1e-300, double hi = 1e300) {
  if (f(lo) <= x) return 0.0;
  if (!(f(hi) <= x)) return kInf;
  return bisect_threshold([&](double y) { return f(y) <= x; }, lo, hi, 1e-15);
}

/// s -> f(k s) for k > 0.
inline MonotoneRate rescale_argument(const MonotoneRate& f, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorKind::InvalidInput, "scale must be positive");
  MonotoneRate::Form form = std::visit(
      [k](const auto& b) -> MonotoneRate::Form {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, PowerLaw>)
          return PowerLaw{b.c * std::pow(k, -b.p), b.p};
        else if constexpr (std::is_same_v<T, ExpPower>)
          return ExpPower{b.c, b.lambda * std::pow(k, b.theta), b.theta};
        else if constexpr (std::is_same_v<T, LogPower>)
          return LogPower{b.c / k, b.lambda, b.theta};
        else if constexpr (std::is_same_v<T, Constant>)
          return b;
        else {
          Tabulated t = b;
          for (auto& x : t.grid) x /= k;
          return t;
        }
      },
      f.form());
  return MonotoneRate(std::move(form), f.floor() / k, f.cap(), f.cutoff() / k);
}

/// Default tabulation grid: 512 log-spaced points on [1e-8, 1e8].
inline std::vector<double> default_rate_grid() { return log_grid(1e-8, 1e8, 512); }

/// Tabulate a nonincreasing callable as a right-continuous step table.  Each step carries the
/// value at its left end, so the table dominates fn between grid points.
inline MonotoneRate tabulate_upper(const std::function<double(double)>& fn,
                                   std::vector<double> grid = default_rate_grid()) {
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = fn(grid[i]);
  for (std::size_t i = vals.size() - 1; i-- > 0;) vals[i] = std::max(vals[i], vals[i + 1]);
  return MonotoneRate::tabulated(std::move(grid), std::move(vals), TabMode::Step);
}

}  // namespace wpi
