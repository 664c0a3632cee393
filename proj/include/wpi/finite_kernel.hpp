#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wpi/error.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A row-stochastic matrix together with an invariant probability vector.
class FiniteKernel {
 public:
  FiniteKernel() = default;

  /// If `mu` is omitted it is computed from the linear system mu (P - I) = 0, sum(mu) = 1.
  explicit FiniteKernel(Matrix P, std::optional<Vector> mu = std::nullopt, double row_tol = 1e-12,
                        double inv_tol = 1e-10)
      : P_(std::move(P)) {
    const Eigen::Index n = P_.rows();
    if (n == 0 || P_.cols() != n) fail(ErrorKind::InvalidInput, "transition matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (!(P_(i, j) >= 0.0)) fail(ErrorKind::InvalidInput, "negative or NaN transition probability");
      double s = P_.row(i).sum();
      if (std::abs(s - 1.0) > row_tol)
        fail(ErrorKind::InvalidInput, "row " + std::to_string(i) + " sums to " + fmt17(s));
    }
    mu_ = mu ? *mu : stationary(P_);
    if (mu_.size() != n) fail(ErrorKind::InvalidInput, "mu has the wrong length");
    if ((mu_.array() < 0.0).any()) fail(ErrorKind::InvalidInput, "mu has negative entries");
    if (std::abs(mu_.sum() - 1.0) > 1e-10) fail(ErrorKind::InvalidInput, "mu must sum to 1");
    Vector drift = (mu_.transpose() * P_).transpose() - mu_;
    if (drift.cwiseAbs().maxCoeff() > inv_tol)
      fail(ErrorKind::InvalidInput, "mu is not invariant (max |mu P - mu| = " + fmt17(drift.cwiseAbs().maxCoeff()) + ")");
  }

  const Matrix& P() const { return P_; }
  const Vector& mu() const { return mu_; }
  int size() const { return int(P_.rows()); }

  bool has_zero_mass() const { return (mu_.array() <= 0.0).any(); }

  /// max |mu(x) P(x,y) - mu(y) P(y,x)|
  double reversibility_defect() const {
    Matrix F = mu_.asDiagonal() * P_;
    return (F - F.transpose()).cwiseAbs().maxCoeff();
  }
  bool is_reversible(double tol = 1e-12) const { return reversibility_defect() <= tol; }

  double min_holding() const { return P_.diagonal().minCoeff(); }

  static Vector stationary(const Matrix& P) {
    const Eigen::Index n = P.rows();
    Matrix A = P.transpose() - Matrix::Identity(n, n);
    A.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    Vector mu = A.fullPivLu().solve(b);
    for (Eigen::Index i = 0; i < n; ++i)
      if (mu(i) < 0.0 && mu(i) > -1e-13) mu(i) = 0.0;
    if (!mu.allFinite() || (mu.array() < 0.0).any())
      fail(ErrorKind::InvalidInput, "no unique invariant distribution; supply mu explicitly");
    return mu / mu.sum();
  }

 private:
  Matrix P_;
  Vector mu_;
};

/// A function on the states with its mu-mean, mu-variance and oscillation (over mu-positive states).
struct Observable {
  Vector values;
  double mean = 0.0;
  double variance = 0.0;
  double osc = 0.0;

  Observable() = default;
  Observable(Vector v, const Vector& mu) : values(std::move(v)) {
    if (values.size() != mu.size()) fail(ErrorKind::InvalidInput, "observable has the wrong length");
    mean = mu.dot(values);
    Vector c = values.array() - mean;
    variance = mu.dot(c.cwiseProduct(c));
    double lo = kInf, hi = -kInf;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (mu(i) <= 0.0) continue;
      lo = std::min(lo, values(i));
      hi = std::max(hi, values(i));
    }
    osc = hi - lo;
  }

  Vector centered() const { return values.array() - mean; }
  double osc_sq() const { return osc * osc; }
};

inline Observable indicator(const std::vector<int>& states, const FiniteKernel& k) {
  Vector v = Vector::Zero(k.size());
  for (int s : states) v(s) = 1.0;
  return Observable(v, k.mu());
}

inline double mu_norm_sq(const Vector& f, const Vector& mu) { return mu.dot(f.cwiseProduct(f)); }

// ---------------------------------------------------------------------------------------------
// kernel constructions

/// P*(x,y) = mu(y) P(y,x) / mu(x).
inline FiniteKernel adjoint(const FiniteKernel& k) {
  const Vector& mu = k.mu();
  if (k.has_zero_mass())
    fail(ErrorKind::ZeroMassState, "adjoint needs mu > 0 everywhere; restrict to the support first");
  Matrix A = mu.cwiseInverse().asDiagonal() * k.P().transpose() * mu.asDiagonal();
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.row(i) /= A.row(i).sum();
  return FiniteKernel(std::move(A), mu);
}

inline FiniteKernel additive_reversibilization(const FiniteKernel& k) {
  FiniteKernel a = adjoint(k);
  return FiniteKernel(0.5 * (k.P() + a.P()), k.mu());
}

/// hold I + (1 - hold) P.
inline FiniteKernel lazy(const FiniteKernel& k, double hold = 0.5) {
  if (!(hold >= 0.0 && hold <= 1.0)) fail(ErrorKind::InvalidInput, "holding probability must lie in [0,1]");
  Matrix L = hold * Matrix::Identity(k.size(), k.size()) + (1.0 - hold) * k.P();
  return FiniteKernel(std::move(L), k.mu());
}

/// The operator P* P, which is mu-reversible for any mu-invariant P.
inline FiniteKernel adjoint_product(const FiniteKernel& k) {
  FiniteKernel a = adjoint(k);
  Matrix T = a.P() * k.P();
  for (Eigen::Index i = 0; i < T.rows(); ++i) T.row(i) /= T.row(i).sum();
  return FiniteKernel(std::move(T), k.mu());
}

inline FiniteKernel matrix_power(const FiniteKernel& k, int n) {
  Matrix R = Matrix::Identity(k.size(), k.size());
  Matrix B = k.P();
  while (n > 0) {
    if (n & 1) R = R * B;
    B = B * B;
    n >>= 1;
  }
  for (Eigen::Index i = 0; i < R.rows(); ++i) R.row(i) /= R.row(i).sum();
  return FiniteKernel(std::move(R), k.mu(), 1e-10);
}

struct SupportRestriction {
  FiniteKernel kernel;
  std::vector<int> states;  ///< original index of each retained state
};

/// Drops mu-null states.  The support of an invariant law is closed, so rows stay stochastic.
inline SupportRestriction restrict_to_support(const FiniteKernel& k) {
  std::vector<int> keep;
  for (int i = 0; i < k.size(); ++i)
    if (k.mu()(i) > 0.0) keep.push_back(i);
  const int m = int(keep.size());
  Matrix P(m, m);
  Vector mu(m);
  for (int a = 0; a < m; ++a) {
    mu(a) = k.mu()(keep[a]);
    for (int b = 0; b < m; ++b) P(a, b) = k.P()(keep[a], keep[b]);
    P.row(a) /= P.row(a).sum();
  }
  return {FiniteKernel(std::move(P), mu / mu.sum()), keep};
}

// ---------------------------------------------------------------------------------------------
// Dirichlet forms and decay

/// E(T,f) = <(I - T) f, f>_mu, evaluated as (1/2) sum mu(x) T(x,y) (f(y) - f(x))^2.
inline double dirichlet_form(const FiniteKernel& T, const Vector& f) {
  const Matrix& P = T.P();
  const Vector& mu = T.mu();
  double e = 0.0;
  for (Eigen::Index x = 0; x < P.rows(); ++x) {
    if (mu(x) == 0.0) continue;
    double row = 0.0;
    for (Eigen::Index y = 0; y < P.cols(); ++y) {
      double d = f(y) - f(x);
      row += P(x, y) * d * d;
    }
    e += mu(x) * row;
  }
  return 0.5 * e;
}

inline double dirichlet_form(const FiniteKernel& T, const Observable& f) { return dirichlet_form(T, f.values); }

/// E(P*P, f) = ||f||^2 - ||P f||^2 for centred f.
inline double dirichlet_form_adjoint_product(const FiniteKernel& k, const Vector& f) {
  Vector c = f.array() - k.mu().dot(f);
  Vector pc = k.P() * c;
  return std::max(0.0, mu_norm_sq(c, k.mu()) - mu_norm_sq(pc, k.mu()));
}

/// ||P^n (f - mu f)||^2 for n = 0..n_max.
inline std::vector<double> pn_decay(const FiniteKernel& k, const Vector& f, std::size_t n_max) {
  Vector g = f.array() - k.mu().dot(f);
  std::vector<double> out(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    out[n] = mu_norm_sq(g, k.mu());
    if (n < n_max) {
      g = k.P() * g;
      g.array() -= k.mu().dot(g);  // keep the iterate centred against round-off
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// spectral measure (reversible kernels)

/// Atoms (lambda_i, mass_i) with <P^n f, f>_mu = sum_i lambda_i^n mass_i.
struct SpectralMeasure {
  std::vector<double> lambda;
  std::vector<double> mass;

  double moment(double n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      if (mass[i] == 0.0) continue;
      s += (n == 0.0 ? 1.0 : std::pow(lambda[i], n)) * mass[i];
    }
    return s;
  }
  double total() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }
  /// mass of {lambda : pred(lambda)}
  template <class Pred>
  double mass_where(Pred pred) const {
    double s = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
      if (pred(lambda[i])) s += mass[i];
    return s;
  }
};

/// Eigen-decomposition of D^{1/2} P D^{-1/2}, symmetric when P is mu-reversible.
struct SymmetricSpectrum {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors;
  Vector sqrt_mu;
};

inline SymmetricSpectrum symmetric_spectrum(const FiniteKernel& k, double tol = 1e-10) {
  if (k.has_zero_mass()) fail(ErrorKind::ZeroMassState, "restrict to the support of mu first");
  double defect = k.reversibility_defect();
  if (defect > tol) fail(ErrorKind::NotReversible, "kernel is not mu-reversible (defect " + fmt17(defect) + ")");
  Vector s = k.mu().cwiseSqrt();
  Matrix S = s.asDiagonal() * k.P() * s.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "eigen-decomposition failed");
  return {es.eigenvalues(), es.eigenvectors(), s};
}

inline SpectralMeasure spectral_measure(const SymmetricSpectrum& sp, const Vector& f) {
  Vector coeff = sp.eigenvectors.transpose() * sp.sqrt_mu.cwiseProduct(f);
  SpectralMeasure m;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    m.lambda.push_back(std::clamp(sp.eigenvalues(i), -1.0, 1.0));
    m.mass.push_back(coeff(i) * coeff(i));
  }
  return m;
}

inline SpectralMeasure spectral_measure(const FiniteKernel& k, const Vector& f) {
  return spectral_measure(symmetric_spectrum(k), f);
}

/// sum over the spectral measure of the centred f of (1 + lambda) / (1 - lambda).
inline double exact_asymptotic_variance(const FiniteKernel& k, const Vector& f, double one_tol = 1e-10) {
  Vector c = f.array() - k.mu().dot(f);
  SpectralMeasure m = spectral_measure(k, c);
  double norm = m.total();
  double var = 0.0;
  for (std::size_t i = 0; i < m.lambda.size(); ++i) {
    if (m.lambda[i] >= 1.0 - one_tol) {
      if (m.mass[i] > 1e-12 * std::max(norm, 1e-300))
        fail(ErrorKind::MassAtOne, "centred observable has spectral mass at eigenvalue 1");
      continue;
    }
    var += m.mass[i] * (1.0 + m.lambda[i]) / (1.0 - m.lambda[i]);
  }
  return var;
}

/// 1 - second largest eigenvalue (the right spectral gap) of a reversible kernel; +inf on one state.
inline double spectral_gap(const FiniteKernel& k) {
  if (k.size() == 1) return kInf;
  SymmetricSpectrum sp = symmetric_spectrum(k);
  return std::max(0.0, 1.0 - sp.eigenvalues(sp.eigenvalues.size() - 2));
}

}  // namespace wpi
