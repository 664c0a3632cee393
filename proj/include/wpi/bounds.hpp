#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wpi/chain_tools.hpp"
#include "wpi/conductance.hpp"
#include "wpi/finite_kernel.hpp"
#include "wpi/monotone_rate.hpp"
#include "wpi/rate_calculus.hpp"

namespace wpi {

// ---------------------------------------------------------------------------------------------
// Drift conditions

enum class DriftForm { Geometric, Subgeometric };

/// Geometric:     PV <= (1 - lambda) V + b 1_C
/// Subgeometric:  PV <= V - phi(V) + b 1_C, phi concave and increasing on [1, inf)
struct DriftCondition {
  Vector V;
  std::vector<int> C;
  DriftForm form = DriftForm::Geometric;
  double lambda = 0.0;
  double b = 0.0;
  std::function<double(double)> phi;
  /// Set when phi(v) = c v^alpha, which has closed-form inverses.
  std::optional<std::pair<double, double>> power;

  static DriftCondition geometric(Vector V, std::vector<int> C, double lambda, double b) {
    DriftCondition d{std::move(V), std::move(C), DriftForm::Geometric, lambda, b, {}, std::nullopt};
    d.validate();
    return d;
  }
  static DriftCondition subgeometric(Vector V, std::vector<int> C, std::function<double(double)> phi, double b) {
    DriftCondition d{std::move(V), std::move(C), DriftForm::Subgeometric, 0.0, b, std::move(phi), std::nullopt};
    d.validate();
    return d;
  }
  static DriftCondition power_law(Vector V, std::vector<int> C, double c, double alpha, double b) {
    if (!(c > 0.0 && alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::DomainError, "need c > 0 and alpha in (0, 1]");
    auto d = subgeometric(std::move(V), std::move(C), [c, alpha](double v) { return c * std::pow(v, alpha); }, b);
    d.power = {c, alpha};
    return d;
  }

  void validate() const {
    if (V.size() == 0) fail(ErrorKind::InvalidInput, "V is empty");
    if (V.minCoeff() < 1.0) fail(ErrorKind::InvalidInput, "V must be at least 1 everywhere");
    if (!(b > 0.0)) fail(ErrorKind::DomainError, "b must be positive");
    for (int x : C)
      if (x < 0 || x >= V.size()) fail(ErrorKind::InvalidInput, "C contains an out-of-range state");
    if (form == DriftForm::Geometric && !(lambda > 0.0 && lambda <= 1.0))
      fail(ErrorKind::DomainError, "lambda must lie in (0, 1]");
    if (form == DriftForm::Subgeometric && !phi) fail(ErrorKind::InvalidInput, "phi is missing");
  }

  Vector indicator_C() const {
    Vector one = Vector::Zero(V.size());
    for (int x : C) one(x) = 1.0;
    return one;
  }
  /// Right-hand side of the drift inequality, pointwise.
  Vector rhs() const {
    Vector r = form == DriftForm::Geometric ? Vector((1.0 - lambda) * V) : Vector(V.unaryExpr([&](double v) { return v - phi(v); }));
    return r + b * indicator_C();
  }
};

struct DriftReport {
  Vector slack;              ///< rhs - PV on every state (inf where mu vanishes)
  double min_slack = kInf;
  int worst_state = -1;
  double mu_phi_V = 0.0;     ///< mu(phi o V), subgeometric only
  double b_mu_C = 0.0;       ///< b mu(C)
  std::string kernel = "P";  ///< "(P+P*)/2" when a nonreversible input was symmetrised
};

/// Pointwise check on positive-mass states.  Nonreversible kernels are checked through
/// (P + P*)/2, the form the drift argument needs.
inline DriftReport verify_drift(const FiniteKernel& k, const DriftCondition& dc, double tol = 1e-10) {
  dc.validate();
  if (dc.V.size() != Eigen::Index(k.size())) fail(ErrorKind::InvalidInput, "V has the wrong length");
  DriftReport rep;
  const FiniteKernel* used = &k;
  std::optional<FiniteKernel> sym;
  if (!k.is_reversible()) {
    sym = additive_reversibilization(k);
    used = &*sym;
    rep.kernel = "(P+P*)/2";
  }
  Vector PV = used->P() * dc.V;
  Vector rhs = dc.rhs();
  rep.slack = rhs - PV;
  const Vector& mu = k.mu();
  for (Eigen::Index x = 0; x < rep.slack.size(); ++x) {
    if (mu(x) <= 0.0) {
      rep.slack(x) = kInf;
      continue;
    }
    if (rep.slack(x) < rep.min_slack) rep.min_slack = rep.slack(x), rep.worst_state = int(x);
  }
  const double scale = std::max(1.0, dc.V.maxCoeff());
  if (rep.min_slack < -tol * scale)
    fail(ErrorKind::DriftViolated, "drift fails at state " + std::to_string(rep.worst_state) + " by " +
                                       fmt17(-rep.min_slack));
  rep.b_mu_C = dc.b * mu.dot(dc.indicator_C());
  if (dc.form == DriftForm::Subgeometric) {
    rep.mu_phi_V = mu.dot(dc.V.unaryExpr(dc.phi));
    if (rep.mu_phi_V > rep.b_mu_C + 1e-10)
      fail(ErrorKind::DriftViolated, "mu(phi o V) = " + fmt17(rep.mu_phi_V) + " exceeds b mu(C) = " + fmt17(rep.b_mu_C));
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Local Poincare inequalities

enum class LocalPiFlavor { Restricted, Local, FromMinorization };

inline const char* to_string(LocalPiFlavor f) {
  switch (f) {
    case LocalPiFlavor::Restricted: return "restricted";
    case LocalPiFlavor::Local: return "local";
    case LocalPiFlavor::FromMinorization: return "from-minorization";
  }
  return "?";
}

/// ||(f - m) 1_C||^2 <= K E(P, f) with m = mu(f 1_C) / mu(C).
struct LocalPI {
  std::vector<int> C;
  double K = 0.0;
  LocalPiFlavor flavor = LocalPiFlavor::Local;
  double epsilon = 0.0;  ///< minorization constant when flavor is FromMinorization
};

/// mu(f 1_C)/mu(C)-centred mass of f on C, the left side of the local inequality.
inline double local_pi_lhs(const FiniteKernel& k, const std::vector<int>& C, const Vector& f) {
  const Vector& mu = k.mu();
  double mc = 0.0, fc = 0.0;
  for (int x : C) mc += mu(x), fc += mu(x) * f(x);
  const double m = fc / mc;
  double s = 0.0;
  for (int x : C) s += mu(x) * (f(x) - m) * (f(x) - m);
  return s;
}

/// Smallest K, as a generalized eigenvalue problem on the mu-orthogonal complement of the
/// constants, where the Dirichlet form of an irreducible chain is positive definite.
inline LocalPI local_pi_constant_exact(const FiniteKernel& k, std::vector<int> C) {
  std::sort(C.begin(), C.end());
  C.erase(std::unique(C.begin(), C.end()), C.end());
  const Eigen::Index n = k.size();
  const Vector& mu = k.mu();
  double mc = 0.0;
  for (int x : C) {
    if (x < 0 || x >= n) fail(ErrorKind::InvalidInput, "C contains an out-of-range state");
    mc += mu(x);
  }
  if (!(mc > 0.0)) fail(ErrorKind::EmptyRestriction, "C carries no mass");
  // In g = D_mu^1/2 f both forms are well scaled even when mu spans many decades:
  //   N(f) = g' (I_C - r r' / mu(C)) g with r = sqrt(mu) 1_C,
  //   E(f) = g' (I - S) g with S = D^1/2 (P + P*)/2 D^-1/2 symmetric.
  // Both vanish along sqrt(mu), so they are compared on its orthogonal complement.
  Vector sq = mu.cwiseSqrt();
  Vector r = Vector::Zero(n);
  for (int x : C) r(x) = sq(x);
  Matrix N = -r * r.transpose() / mc;
  for (int x : C) N(x, x) += 1.0;
  Matrix S = sq.asDiagonal() * additive_reversibilization(k).P() * sq.cwiseInverse().asDiagonal();
  Matrix E = Matrix::Identity(n, n) - 0.5 * (S + S.transpose());
  Eigen::HouseholderQR<Matrix> qr(sq);
  Matrix Q = Matrix(qr.householderQ()).rightCols(n - 1);
  Matrix Nr = Q.transpose() * N * Q, Er = Q.transpose() * E * Q;
  Nr = 0.5 * (Nr + Nr.transpose());
  Er = 0.5 * (Er + Er.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> ee(Er, Eigen::EigenvaluesOnly);
  if (ee.eigenvalues().minCoeff() <= 1e-13)
    fail(ErrorKind::AssumptionViolated, "the Dirichlet form vanishes on a nonconstant function: the chain is reducible");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ge(Nr, Er);
  return LocalPI{C, std::max(0.0, ge.eigenvalues().maxCoeff()), LocalPiFlavor::Local, 0.0};
}

struct Minorization {
  double epsilon = 0.0;
  Vector nu;  ///< minorizing probability, when epsilon > 0
};

/// Largest eps with P(x, .) >= eps nu(.) for every x in C: eps = sum_y min_{x in C} P(x, y).
inline Minorization minorization_constant(const FiniteKernel& k, const std::vector<int>& C) {
  if (C.empty()) fail(ErrorKind::EmptyRestriction, "C is empty");
  Vector lo = k.P().row(C.front()).transpose();
  for (int x : C) {
    lo = lo.cwiseMin(Vector(k.P().row(x).transpose()));
    if (lo.sum() <= 0.0)
      fail(ErrorKind::MinorizationFails, "rows over C share no mass once row " + std::to_string(x) + " is included");
  }
  Minorization m;
  m.epsilon = lo.sum();
  m.nu = lo / m.epsilon;
  return m;
}

/// Minorization on C gives the local inequality with K = 2 / eps.
inline LocalPI local_pi_from_minorization(double epsilon, std::vector<int> C) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail(ErrorKind::MinorizationFails, "epsilon must lie in (0, 1]");
  return LocalPI{std::move(C), 2.0 / epsilon, LocalPiFlavor::FromMinorization, epsilon};
}

inline LocalPI local_pi_from_minorization(const FiniteKernel& k, const std::vector<int>& C) {
  return local_pi_from_minorization(minorization_constant(k, C).epsilon, C);
}

// ---------------------------------------------------------------------------------------------
// Drift to Poincare

/// Spectral gap lower bound lambda / (1 + K b).
inline double spi_from_drift(const DriftCondition& dc, const LocalPI& lpi) {
  if (dc.form != DriftForm::Geometric) fail(ErrorKind::InvalidInput, "spi_from_drift needs a geometric drift");
  return dc.lambda / (1.0 + lpi.K * dc.b);
}

/// Finite-chain version: verifies the drift, and on reversible chains asserts the bound does not
/// exceed the exact right spectral gap.
inline double spi_from_drift(const FiniteKernel& k, const DriftCondition& dc, const LocalPI& lpi) {
  verify_drift(k, dc);
  double bound = spi_from_drift(dc, lpi);
  if (k.is_reversible()) {
    double gap = spectral_gap(k);
    if (bound > gap * (1.0 + 1e-9) + 1e-12)
      fail(ErrorKind::AssumptionViolated, "bound " + fmt17(bound) + " exceeds the exact gap " + fmt17(gap) +
                                              "; the local inequality constant is too small");
  }
  return bound;
}

/// (Id/phi)^-1(y): the v >= 1 with v / phi(v) = y, by bisection on an expanding bracket.
inline double inverse_id_over_phi(const std::function<double(double)>& phi, double y, double v_hint = 1e3) {
  const double y0 = 1.0 / phi(1.0);
  if (y < y0) fail(ErrorKind::RangeError, "s/(1+Kb) = " + fmt17(y) + " is below 1/phi(1) = " + fmt17(y0));
  double lo = 1.0, hi = std::max(2.0, v_hint);
  while (hi / phi(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) fail(ErrorKind::RangeError, "v/phi(v) stays below " + fmt17(y));
  }
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    (mid / phi(mid) < y ? lo : hi) = mid;
  }
  return hi;
}

/// beta(s) = b mu(C) / phi((Id/phi)^-1(s / (1 + K b))) at one point.
inline double wpi_from_drift_value(const DriftCondition& dc, const LocalPI& lpi, double mu_C, double s,
                                   double v_hint = 1e3) {
  const double sp = s / (1.0 + lpi.K * dc.b);
  return dc.b * mu_C / dc.phi(inverse_id_over_phi(dc.phi, sp, v_hint));
}

/// Values of a tabulated beta below this are cut to zero.
inline constexpr double kDriftTailTol = 1e-16;

/// WPI from a subgeometric drift and a local Poincare inequality on C.  beta is capped at 1
/// (always valid for centred f against the squared oscillation).  phi = c v^alpha gives a power
/// law with exponent alpha/(1-alpha); alpha = 1 is geometric and yields beta = 1 up to
/// (1 + K b)/c and 0 beyond.  Other phi are tabulated from above.
inline WpiCertificate wpi_from_drift(const DriftCondition& dc, const LocalPI& lpi, double mu_C) {
  if (dc.form != DriftForm::Subgeometric) fail(ErrorKind::InvalidInput, "wpi_from_drift needs a subgeometric drift");
  if (!(mu_C > 0.0 && mu_C <= 1.0)) fail(ErrorKind::DomainError, "mu(C) must lie in (0, 1]");
  const double scale = 1.0 + lpi.K * dc.b;
  if (dc.power) {
    auto [c, alpha] = *dc.power;
    if (alpha >= 1.0)
      return beta_certificate(MonotoneRate::constant(1.0).with_cutoff(scale / c), 1.0, "drift-geometric");
    const double p = alpha / (1.0 - alpha);
    const double coef = dc.b * mu_C / c * std::pow(scale / c, p);
    return beta_certificate(MonotoneRate::power_law(coef, p).with_cap(1.0), 1.0, "drift-power");
  }
  const double s0 = scale / dc.phi(1.0);
  const double v_hint = 10.0 * dc.V.maxCoeff();
  std::vector<double> grid = log_grid(s0, s0 * 1e16, 2048);
  auto value = [&](double s) {
    try {
      return std::min(1.0, wpi_from_drift_value(dc, lpi, mu_C, s, v_hint));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RangeError) throw;
      // v/phi(v) < y up to the largest double, so beta < b mu(C) y / DBL_MAX: below the cut
      return 0.0;
    }
  };
  MonotoneRate tab = tabulate_upper(value, grid);
  // below s0 the level set is empty and beta = 1; past the tolerance the table is cut to zero
  double cut = kInf;
  for (double s : grid)
    if (tab(s) < kDriftTailTol) {
      cut = s;
      break;
    }
  const auto& t = tab.as<Tabulated>();
  std::vector<double> g{kTiny}, v{1.0};
  g.insert(g.end(), t.grid.begin(), t.grid.end());
  v.insert(v.end(), t.values.begin(), t.values.end());
  return beta_certificate(MonotoneRate::tabulated(g, v, TabMode::Step).with_cutoff(cut), 1.0, "drift-general");
}

struct DriftWpi {
  DriftReport drift;
  LocalPI local;
  double mu_C = 0.0;
  WpiCertificate cert;
};

/// Finite-chain driver: the argument needs a unique invariant law, so reducible chains are
/// rejected before the drift is verified and the local constant on C is computed exactly.
inline DriftWpi wpi_from_drift(const FiniteKernel& k, const DriftCondition& dc) {
  auto rupi = rupi_check(k);
  if (!rupi.irreducible)
    fail(ErrorKind::AssumptionViolated, "chain is reducible (state " + std::to_string(rupi.from) + " cannot reach " +
                                            std::to_string(rupi.to) + "); the invariant law is not unique");
  DriftWpi out;
  out.drift = verify_drift(k, dc);
  out.local = local_pi_constant_exact(k, dc.C);
  out.mu_C = k.mu().dot(dc.indicator_C());
  out.cert = wpi_from_drift(dc, out.local, out.mu_C);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Isoperimetry and conductance

struct IsoperimetricConductance {
  double first = 0.0;   ///< eps/4 min{1, (log 2/8) delta sqrt(m)}, multiplies min{mu(A n C), mu(A^c n C)}
  double second = 0.0;  ///< (1/mu(C)) eps/4 min{1, (log 2/4) delta sqrt(m)}, for the product form
};

inline IsoperimetricConductance conductance_from_isoperimetry(double eps, double delta, double m, double mu_C) {
  if (!(eps > 0.0 && delta > 0.0 && m > 0.0)) fail(ErrorKind::DomainError, "eps, delta, m must be positive");
  if (!(mu_C > 0.0 && mu_C <= 1.0)) fail(ErrorKind::DomainError, "mu(C) must lie in (0, 1]");
  const double r = delta * std::sqrt(m) * std::numbers::ln2;
  return {eps / 4.0 * std::min(1.0, r / 8.0), eps / (4.0 * mu_C) * std::min(1.0, r / 4.0)};
}

/// Lower envelope kappa(u) >= c u^theta on (0, 1/16] (theta = 0 is a constant conductance).
struct PowerEnvelope {
  double c = 1.0;
  double theta = 0.0;
};

/// alpha(r) = 16 / kappa(r/16)^2 = 16^(1 + 2 theta) / c^2 r^(-2 theta), zero from r = 1 on.
inline WpiCertificate wpi_from_conductance(const PowerEnvelope& env) {
  if (!(env.c > 0.0)) fail(ErrorKind::ZeroConductance, "conductance envelope must be positive");
  if (env.theta < 0.0) fail(ErrorKind::DomainError, "theta must be nonnegative");
  MonotoneRate alpha = env.theta == 0.0
                           ? MonotoneRate::constant(16.0 / (env.c * env.c))
                           : MonotoneRate::power_law(std::pow(16.0, 1.0 + 2.0 * env.theta) / (env.c * env.c), 2.0 * env.theta);
  return alpha_certificate(alpha.with_cutoff(1.0), 1.0, "conductance-envelope");
}

inline WpiCertificate wpi_from_conductance(const ConductanceProfile& prof) { return cheeger_wpi(prof); }

// ---------------------------------------------------------------------------------------------
// Engineered chain with a polynomial drift

struct DriftChain {
  FiniteKernel kernel;
  DriftCondition drift;
  double alpha = 0.6;
};

/// Lazy birth-death chain on 0..n-1 with up/down probabilities (1 -+ h_i)/4,
/// h_i = min(1/2, 4/(i+1)), so holding is at least 1/2.  With V = (i+1)^p, p = 2/(1-alpha),
/// PV - V ~ p (i+1)^(p-2) [(p-1)/4 - 2] = -c V^alpha off a small set C = {0..c_size-1}, which
/// needs p < 9 (alpha < 7/9); c and b are computed exactly from the chain.
inline DriftChain drift_birth_death(int n = 400, double alpha = 0.6, int c_size = 11) {
  if (n < c_size + 2 || !(alpha > 0.0 && alpha < 7.0 / 9.0)) fail(ErrorKind::DomainError, "bad drift chain parameters");
  Matrix P = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double h = std::min(0.5, 4.0 / (i + 1.0));
    const double up = i + 1 < n ? (1.0 - h) / 4.0 : 0.0;
    const double down = i > 0 ? (1.0 + h) / 4.0 : 0.0;
    if (up > 0.0) P(i, i + 1) = up;
    if (down > 0.0) P(i, i - 1) = down;
    P(i, i) = 1.0 - up - down;
  }
  // detailed balance mu(i+1) / mu(i) = P(i, i+1) / P(i+1, i); a dense solve loses the tail
  Vector mu(n);
  mu(0) = 1.0;
  for (int i = 0; i + 1 < n; ++i) mu(i + 1) = mu(i) * P(i, i + 1) / P(i + 1, i);
  FiniteKernel k(std::move(P), Vector(mu / mu.sum()));
  Vector V(n);
  const double e = 2.0 / (1.0 - alpha);
  for (int i = 0; i < n; ++i) V(i) = std::pow(i + 1.0, e);
  Vector PV = k.P() * V;
  double c = kInf;
  for (int i = c_size; i < n; ++i) c = std::min(c, (V(i) - PV(i)) / std::pow(V(i), alpha));
  if (!(c > 0.0)) fail(ErrorKind::DriftViolated, "no positive drift constant off C");
  double b = 0.0;
  std::vector<int> C;
  for (int i = 0; i < c_size; ++i) {
    C.push_back(i);
    b = std::max(b, PV(i) - V(i) + c * std::pow(V(i), alpha));
  }
  return DriftChain{k, DriftCondition::power_law(V, C, c, alpha, b), alpha};
}

}  // namespace wpi
