#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wpi/finite_kernel.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

/// Independence sampler on N0 with target (1-a) a^x and proposal (1-b) b^x, 0 < b < a < 1,
/// truncated to states 0..truncation.
struct ImhGeometric {
  double a = 0.5;
  double b = 0.25;
  int truncation = 200;

  void validate() const {
    if (!(0.0 < b && b < a && a < 1.0)) fail(ErrorKind::DomainError, "need 0 < b < a < 1");
    if (truncation < 1) fail(ErrorKind::DomainError, "truncation must be at least 1");
  }
};

/// Lambda_m = 1 - (1-b)/(1-a) (b/a)^m + (a-b)/(1-a) b^m, m = 0..m_max: the rejection
/// probability at state m of the untruncated chain.
inline std::vector<double> imh_spectrum(const ImhGeometric& c, int m_max) {
  c.validate();
  std::vector<double> out;
  for (int m = 0; m <= m_max; ++m)
    out.push_back(1.0 - (1.0 - c.b) / (1.0 - c.a) * std::pow(c.b / c.a, m) +
                  (c.a - c.b) / (1.0 - c.a) * std::pow(c.b, m));
  return out;
}

/// Truncated IMH.  Proposals beyond the truncation are rejected, so their mass b^(N+1) sits on
/// the diagonal; the target is renormalised over 0..N and the kernel stays reversible.
inline FiniteKernel imh_build(const ImhGeometric& c) {
  c.validate();
  const int n = c.truncation + 1;
  Vector pi(n), q(n);
  for (int x = 0; x < n; ++x) {
    pi(x) = (1.0 - c.a) * std::pow(c.a, x);
    q(x) = (1.0 - c.b) * std::pow(c.b, x);
  }
  pi /= pi.sum();
  // w(y)/w(x) = (a/b)^(y-x)
  const double ratio = c.a / c.b;
  Matrix P = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    double moved = 0.0;
    for (int y = 0; y < n; ++y) {
      if (y == x) continue;
      double acc = y > x ? 1.0 : std::pow(ratio, y - x);
      P(x, y) = q(y) * acc;
      moved += P(x, y);
    }
    P(x, x) = 1.0 - moved;
  }
  return FiniteKernel(std::move(P), pi);
}

struct ImhValidation {
  std::vector<double> eigen;      ///< smallest `count` eigenvalues of the built matrix
  std::vector<double> formula;    ///< Lambda_1..Lambda_count
  std::vector<double> residual;
  double max_residual = 0.0;
};

/// The truncated kernel has eigenvalues Lambda_1..Lambda_N and 1: Lambda_m is the probability of
/// rejecting a proposal from state m, and the state of smallest weight (m = 0) contributes no
/// eigenvalue.  The smallest `count` eigenvalues are therefore compared with Lambda_1..Lambda_count.
inline ImhValidation imh_spectrum_validate(const ImhGeometric& c, int count, double tol = 1e-8, int margin = 10) {
  if (c.truncation < count + margin)
    fail(ErrorKind::TruncationTooSmall, "truncation must exceed the eigenvalue count by at least " +
                                            std::to_string(margin));
  FiniteKernel k = imh_build(c);
  SymmetricSpectrum sp = symmetric_spectrum(k);
  ImhValidation v;
  std::vector<double> lam = imh_spectrum(c, count);
  for (int m = 1; m <= count; ++m) {
    v.formula.push_back(lam[m]);
    v.eigen.push_back(sp.eigenvalues(m - 1));
    v.residual.push_back(std::abs(v.eigen.back() - v.formula.back()));
    v.max_residual = std::max(v.max_residual, v.residual.back());
  }
  if (v.max_residual > tol)
    fail(ErrorKind::TruncationTooSmall,
         "eigenvalues differ from the closed form by " + fmt17(v.max_residual) + " > " + fmt17(tol));
  return v;
}

enum class AsymVarVerdict { Finite, Divergent, Borderline };

inline const char* to_string(AsymVarVerdict v) {
  switch (v) {
    case AsymVarVerdict::Finite: return "finite";
    case AsymVarVerdict::Divergent: return "divergent";
    case AsymVarVerdict::Borderline: return "borderline";
  }
  return "?";
}

struct ImhAsymVarReport {
  std::vector<double> mass;          ///< nu_f(Lambda_m), m = 1..N
  std::vector<double> partial_sums;  ///< sum_{1<=j<=m} nu_f(Lambda_j) / (1 - Lambda_j)
  double decay_rate = 0.0;           ///< fitted -log(mass ratio per m)
  double critical_rate = 0.0;        ///< log(a/b)
  AsymVarVerdict verdict = AsymVarVerdict::Borderline;
};

/// The series sum nu_f(Lambda_m)/(1 - Lambda_m) converges iff the masses decay faster than
/// (b/a)^m.  The decay rate is fitted on the middle half of the nonnegligible masses.
inline ImhAsymVarReport imh_asymvar_criterion(const ImhGeometric& c, const Vector& f, double band = 0.1) {
  FiniteKernel k = imh_build(c);
  SymmetricSpectrum sp = symmetric_spectrum(k);
  Vector centred = f.array() - k.mu().dot(f);
  SpectralMeasure nu = spectral_measure(sp, centred);
  ImhAsymVarReport r;
  r.critical_rate = std::log(c.a / c.b);
  const int n = int(nu.lambda.size()) - 1;  // the top eigenvalue is 1
  double acc = 0.0;
  for (int m = 0; m < n; ++m) {
    r.mass.push_back(nu.mass[m]);
    acc += nu.mass[m] / (1.0 - nu.lambda[m]);
    r.partial_sums.push_back(acc);
  }
  double total = nu.total();
  std::vector<double> xs, ys;
  for (int m = 0; m < n; ++m)
    if (r.mass[m] > 1e-13 * total) xs.push_back(m), ys.push_back(std::log(r.mass[m]));
  if (xs.size() >= 4) {
    std::size_t lo = xs.size() / 4, hi = xs.size() - xs.size() / 4;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = double(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) sx += xs[i], sy += ys[i], sxx += xs[i] * xs[i], sxy += xs[i] * ys[i];
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    r.decay_rate = -slope;
    double ratio = r.decay_rate / r.critical_rate;
    r.verdict = ratio > 1.0 + band ? AsymVarVerdict::Finite
                : ratio < 1.0 - band ? AsymVarVerdict::Divergent
                                     : AsymVarVerdict::Borderline;
  } else {
    r.decay_rate = kInf;
    r.verdict = AsymVarVerdict::Finite;  // finitely many atoms
  }
  return r;
}

}  // namespace wpi
