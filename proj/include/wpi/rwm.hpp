#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "wpi/error.hpp"
#include "wpi/parallel.hpp"

namespace wpi {

// ---------------------------------------------------------------------------------------------
// Counter-based random numbers

/// Philox4x32-10.  Stateless: the output depends only on (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter c, Key k) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) k[0] += kW0, k[1] += kW1;
      std::uint64_t p0 = std::uint64_t(kM0) * c[0];
      std::uint64_t p1 = std::uint64_t(kM1) * c[2];
      c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
           std::uint32_t(p0)};
    }
    return c;
  }
};

/// Random stream keyed by (seed, stream index).  Draw j of stream i is a pure function of
/// (seed, i, j), so any split of streams across threads gives identical numbers.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        stream_lo_(std::uint32_t(stream)),
        stream_hi_(std::uint32_t(stream >> 32)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    if (pos_ == 4) refill();
    return (double(buf_[pos_++]) + 0.5) * 0x1p-32;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  void refill() {
    buf_ = Philox4x32::apply({stream_lo_, stream_hi_, block_++, 0u}, key_);
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_lo_, stream_hi_, block_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------------------------
// Targets

enum class RwmPotential { Gaussian, LogisticDemo };

inline const char* to_string(RwmPotential p) {
  return p == RwmPotential::Gaussian ? "gaussian" : "logistic-demo";
}

inline RwmPotential rwm_potential_from_string(const std::string& s) {
  if (s == "gaussian") return RwmPotential::Gaussian;
  if (s == "logistic-demo") return RwmPotential::LogisticDemo;
  fail(ErrorKind::InvalidInput, "unknown potential preset '" + s + "'");
}

/// Random walk Metropolis with proposal N(x, sigma_d^2 Id), sigma_d = varsigma / sqrt(L d), on a
/// target exp(-U) that is m-strongly convex and L-smooth.
struct RwmSpec {
  int d = 2;
  double sigma0 = 1.0;
  double varsigma = 1.0;
  double m = 1.0;
  double L = 1.0;
  RwmPotential potential = RwmPotential::Gaussian;
  int n_obs = 4;                  ///< logistic-demo: number of synthetic observations
  std::uint64_t data_seed = 7;    ///< logistic-demo: seed of the synthetic design

  void validate() const {
    if (d < 1) fail(ErrorKind::DomainError, "dimension must be positive");
    if (!(sigma0 > 0.0 && varsigma > 0.0)) fail(ErrorKind::DomainError, "sigma0 and varsigma must be positive");
    if (!(m > 0.0 && m <= L)) fail(ErrorKind::DomainError, "need 0 < m <= L");
  }
  double proposal_sd() const { return varsigma / std::sqrt(L * d); }
};

using RVector = Eigen::VectorXd;

/// Evaluable target: potential, gradient and an exact sampler.
struct RwmTarget {
  RwmSpec spec;
  std::function<double(const RVector&)> U;
  std::function<RVector(const RVector&)> grad;
  std::function<RVector(CounterStream&)> sample;
};

namespace detail {

struct LogisticData {
  Eigen::MatrixXd A;  ///< n_obs x d design
  RVector y;          ///< labels in {0, 1}
};

inline LogisticData logistic_data(const RwmSpec& s) {
  LogisticData data{Eigen::MatrixXd(s.n_obs, s.d), RVector(s.n_obs)};
  for (int i = 0; i < s.n_obs; ++i) {
    CounterStream rng(s.data_seed, std::uint64_t(i));
    double t = 0.0;
    for (int j = 0; j < s.d; ++j) {
      data.A(i, j) = rng.normal() / std::sqrt(double(s.d));
      t += data.A(i, j);
    }
    data.y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-t)) ? 1.0 : 0.0;
  }
  return data;
}

/// log(1 + e^t), stable for large |t|
inline double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace detail

/// Preset spec with m and L set from the potential.
inline RwmSpec rwm_preset(RwmPotential p, int d, double varsigma, double sigma0 = 1.0, int n_obs = 4,
                          std::uint64_t data_seed = 7) {
  RwmSpec s;
  s.d = d, s.varsigma = varsigma, s.sigma0 = sigma0, s.potential = p, s.n_obs = n_obs, s.data_seed = data_seed;
  s.m = s.L = 1.0 / (sigma0 * sigma0);
  if (p == RwmPotential::LogisticDemo) {
    auto data = detail::logistic_data(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(data.A.transpose() * data.A);
    s.L += 0.25 * es.eigenvalues().maxCoeff();
  }
  s.validate();
  return s;
}

/// Gaussian: U = |x|^2 / (2 sigma0^2).  logistic-demo: Gaussian prior plus the logistic
/// regression negative log-likelihood sum_i [log(1 + e^<a_i,x>) - y_i <a_i,x>], which is
/// nonnegative, so exact draws come from rejection against the prior.
inline RwmTarget rwm_target(const RwmSpec& spec) {
  spec.validate();
  RwmTarget t;
  t.spec = spec;
  const double s0 = spec.sigma0;
  const int d = spec.d;
  if (spec.potential == RwmPotential::Gaussian) {
    t.U = [s0](const RVector& x) { return x.squaredNorm() / (2.0 * s0 * s0); };
    t.grad = [s0](const RVector& x) -> RVector { return x / (s0 * s0); };
    t.sample = [s0, d](CounterStream& rng) {
      RVector x(d);
      for (int j = 0; j < d; ++j) x(j) = s0 * rng.normal();
      return x;
    };
    return t;
  }
  auto data = std::make_shared<detail::LogisticData>(detail::logistic_data(spec));
  auto nll = [data](const RVector& x) {
    RVector z = data->A * x;
    double v = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) v += detail::softplus(z(i)) - data->y(i) * z(i);
    return v;
  };
  t.U = [s0, nll](const RVector& x) { return x.squaredNorm() / (2.0 * s0 * s0) + nll(x); };
  t.grad = [s0, data](const RVector& x) -> RVector {
    RVector z = data->A * x;
    RVector r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = 1.0 / (1.0 + std::exp(-z(i))) - data->y(i);
    return x / (s0 * s0) + data->A.transpose() * r;
  };
  t.sample = [s0, d, nll](CounterStream& rng) {
    for (;;) {
      RVector x(d);
      for (int j = 0; j < d; ++j) x(j) = s0 * rng.normal();
      if (rng.uniform() < std::exp(-nll(x))) return x;
    }
  };
  return t;
}

// ---------------------------------------------------------------------------------------------
// Monte Carlo engine

/// {value, stderr, n_samples, seed}
struct McEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline constexpr std::uint64_t kMcChunk = 4096;

/// Sums of K per-sample statistics and of their pairwise products.
template <int K>
struct MomentSums {
  std::array<double, K> s{};
  std::array<std::array<double, K>, K> ss{};
  void add(const std::array<double, K>& v) {
    for (int i = 0; i < K; ++i) {
      s[i] += v[i];
      for (int j = 0; j < K; ++j) ss[i][j] += v[i] * v[j];
    }
  }
  void merge(const MomentSums& o) {
    for (int i = 0; i < K; ++i) {
      s[i] += o.s[i];
      for (int j = 0; j < K; ++j) ss[i][j] += o.ss[i][j];
    }
  }
};

/// Sample i draws from CounterStream(seed, i).  Samples are summed in fixed chunks and the
/// chunks merged in order, so results are bit-identical for every width.
template <int K, class Fn>
MomentSums<K> mc_run(std::uint64_t samples, std::uint64_t seed, unsigned width, Fn&& per_sample) {
  const std::uint64_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<MomentSums<K>> parts(chunks);
  for_each_block(chunks, width, [&](std::uint64_t c) {
    MomentSums<K> acc;
    const std::uint64_t end = std::min(samples, (c + 1) * kMcChunk);
    for (std::uint64_t i = c * kMcChunk; i < end; ++i) {
      CounterStream rng(seed, i);
      acc.add(per_sample(rng));
    }
    parts[c] = acc;
  });
  MomentSums<K> total;
  for (auto& p : parts) total.merge(p);
  return total;
}

template <int K>
double mc_mean(const MomentSums<K>& m, int i, double n) { return m.s[i] / n; }

template <int K>
double mc_cov(const MomentSums<K>& m, int i, int j, double n) {
  return n > 1 ? (m.ss[i][j] - m.s[i] * m.s[j] / n) / (n - 1.0) : 0.0;
}

}  // namespace detail

enum class RwmSetKind { Empty, HalfSpace, Ball };

/// HalfSpace is {x_1 >= 0}; Ball is {|x| <= radius}.
struct RwmSet {
  RwmSetKind kind = RwmSetKind::HalfSpace;
  double radius = 0.0;

  bool contains(const RVector& x) const {
    switch (kind) {
      case RwmSetKind::Empty: return false;
      case RwmSetKind::HalfSpace: return x(0) >= 0.0;
      case RwmSetKind::Ball: return x.norm() <= radius;
    }
    return false;
  }
  std::string name() const {
    switch (kind) {
      case RwmSetKind::Empty: return "empty";
      case RwmSetKind::HalfSpace: return "half-space";
      case RwmSetKind::Ball: return "ball";
    }
    return "?";
  }
};

struct RwmSetEstimate {
  RwmSet set;
  McEstimate flow;        ///< pi x P(A x A^c)
  McEstimate product;     ///< pi x pi(A x A^c) = pi(A) pi(A^c)
  McEstimate kappa;       ///< flow / product
  McEstimate acceptance;  ///< mean acceptance probability started in A
};

/// For X ~ pi and Z ~ N(0, Id), the antithetic pair Y = X +- sigma_d Z is scored with the exact
/// acceptance probability, so flow = E[1_A(X) a(X,Y) 1_{A^c}(Y)] without accept/reject noise.
/// Ratio standard errors use the delta method.
inline std::vector<RwmSetEstimate> rwm_conductance_mc(const RwmSpec& spec, const std::vector<RwmSet>& sets,
                                                      std::uint64_t samples, std::uint64_t seed,
                                                      unsigned width = 1) {
  RwmTarget target = rwm_target(spec);
  const double sd = spec.proposal_sd();
  std::vector<RwmSetEstimate> out;
  for (const RwmSet& set : sets) {
    RwmSetEstimate e;
    e.set = set;
    // statistics per sample: flow g, indicator h, acceptance-in-A e
    auto sums = detail::mc_run<3>(samples, seed, width, [&](CounterStream& rng) {
      RVector x = target.sample(rng);
      RVector z(spec.d);
      for (int j = 0; j < spec.d; ++j) z(j) = rng.normal();
      if (!set.contains(x)) return std::array<double, 3>{0.0, 0.0, 0.0};
      const double ux = target.U(x);
      double g = 0.0, acc = 0.0;
      for (double sign : {1.0, -1.0}) {
        RVector y = x + sign * sd * z;
        double a = std::min(1.0, std::exp(ux - target.U(y)));
        acc += 0.5 * a;
        if (!set.contains(y)) g += 0.5 * a;
      }
      return std::array<double, 3>{g, 1.0, acc};
    });
    const double n = double(samples);
    const double G = detail::mc_mean(sums, 0, n), p = detail::mc_mean(sums, 1, n), Eacc = detail::mc_mean(sums, 2, n);
    const double vg = detail::mc_cov(sums, 0, 0, n), vh = detail::mc_cov(sums, 1, 1, n), ve = detail::mc_cov(sums, 2, 2, n);
    const double cgh = detail::mc_cov(sums, 0, 1, n), ceh = detail::mc_cov(sums, 2, 1, n);
    auto est = [&](double v, double var) {
      return McEstimate{v, std::sqrt(std::max(var, 0.0) / n), samples, seed};
    };
    e.flow = est(G, vg);
    const double D = p * (1.0 - p), dD = 1.0 - 2.0 * p;
    e.product = est(D, dD * dD * vh);
    if (D > 0.0) {
      const double R = G / D;
      e.kappa = est(R, (vg + R * R * dD * dD * vh - 2.0 * R * dD * cgh) / (D * D));
    } else {
      e.kappa = est(0.0, 0.0);
    }
    if (p > 0.0) {
      const double A = Eacc / p;
      e.acceptance = est(A, (ve + A * A * vh - 2.0 * A * ceh) / (p * p));
    } else {
      e.acceptance = est(0.0, 0.0);
    }
    out.push_back(e);
  }
  return out;
}

/// Upper bound on the half-space conductance, 4 varsigma d^-1/2.
inline double rwm_halfspace_kappa_ceiling(const RwmSpec& s) { return 4.0 * s.varsigma / std::sqrt(double(s.d)); }

/// Gaussian target: delta_d = sigma_d sqrt(d) / (4 sqrt 2) capped at the median radius of pi.
inline double rwm_ball_radius(const RwmSpec& s) {
  if (s.potential != RwmPotential::Gaussian)
    fail(ErrorKind::DomainError, "the ball set radius is defined for the Gaussian target");
  const double sigma_d = s.varsigma * s.sigma0 / std::sqrt(double(s.d));
  boost::math::chi_squared chi2(s.d);
  const double median = s.sigma0 * std::sqrt(boost::math::quantile(chi2, 0.5));
  return std::min(sigma_d * std::sqrt(double(s.d)) / (4.0 * std::sqrt(2.0)), median);
}

/// Ceiling on the acceptance probability from inside the ball when the proposal scale is
/// varsigma sigma0 d^-beta: exp(-d/16) + exp(-varsigma^2 d^(1-2 beta) / 8).  The ball's
/// conductance is at most twice this.
inline double rwm_ball_acceptance_ceiling(const RwmSpec& s, double beta = 0.5) {
  return std::exp(-s.d / 16.0) + std::exp(-s.varsigma * s.varsigma * std::pow(double(s.d), 1.0 - 2.0 * beta) / 8.0);
}

/// Mean acceptance probability for X ~ pi restricted to the ball {|x| <= radius}, Gaussian
/// target.  |X|^2 / sigma0^2 is drawn from the chi^2_d law truncated to the ball by inverse CDF,
/// so the estimate stays informative when pi(ball) is far below 1/samples.
inline McEstimate mc_ball_acceptance(const RwmSpec& spec, double radius, std::uint64_t samples, std::uint64_t seed,
                                     unsigned width = 1) {
  if (spec.potential != RwmPotential::Gaussian)
    fail(ErrorKind::DomainError, "restricted ball sampling is defined for the Gaussian target");
  spec.validate();
  const double s0 = spec.sigma0, sd = spec.proposal_sd();
  boost::math::chi_squared chi2(spec.d);
  const double top = boost::math::cdf(chi2, (radius / s0) * (radius / s0));
  if (!(top > 0.0)) fail(ErrorKind::DomainError, "ball radius must be positive");
  auto sums = detail::mc_run<1>(samples, seed, width, [&](CounterStream& rng) {
    RVector dir(spec.d), z(spec.d);
    for (int j = 0; j < spec.d; ++j) dir(j) = rng.normal();
    const double r = s0 * std::sqrt(boost::math::quantile(chi2, rng.uniform() * top));
    RVector x = r / dir.norm() * dir;
    for (int j = 0; j < spec.d; ++j) z(j) = rng.normal();
    double acc = 0.0;
    for (double sign : {1.0, -1.0}) {
      RVector y = x + sign * sd * z;
      acc += 0.5 * std::min(1.0, std::exp((x.squaredNorm() - y.squaredNorm()) / (2.0 * s0 * s0)));
    }
    return std::array<double, 1>{acc};
  });
  const double n = double(samples);
  return {detail::mc_mean(sums, 0, n), std::sqrt(detail::mc_cov(sums, 0, 0, n) / n), samples, seed};
}

// ---------------------------------------------------------------------------------------------
// Closed-form gap bounds

enum class RwmRegime { GeneralConvex, Gaussian };

inline const char* to_string(RwmRegime r) { return r == RwmRegime::Gaussian ? "gaussian" : "general-convex"; }

// Constants of the published conductance bounds, used as stated.
inline constexpr double kConvexVarsigmaMax = 0.073;
inline constexpr double kConvexKappaConst = 8.46e-5;
inline constexpr double kConvexGapConst = 8.94e-10;
inline constexpr double kGaussKappaConst = 0.00216;

struct RwmGapBounds {
  double conductance_lower = 0.0;
  double gap_lower = 0.0;
  double gap_upper = 0.0;
};

/// Gaussian regime: exponent varsigma^2 [1 + 2 d^-1/2 + 2/d].
inline double rwm_gaussian_exponent(double varsigma, int d) {
  return varsigma * varsigma * (1.0 + 2.0 / std::sqrt(double(d)) + 2.0 / d);
}

/// Lower bounds from the isoperimetric conductance argument, gap >= kappa^2 / 8, and the upper
/// bound Gap <= sigma_d^2 / (2 Var(X_1)) = varsigma^2 / (2d).  For general convex targets
/// Var(X_1) >= 1/L, which gives the same upper bound.
inline RwmGapBounds rwm_gap_bounds(const RwmSpec& s, RwmRegime regime) {
  s.validate();
  RwmGapBounds r;
  const double d = s.d, v = s.varsigma;
  if (regime == RwmRegime::GeneralConvex) {
    if (v > kConvexVarsigmaMax)
      fail(ErrorKind::RegimeViolation, "general convex bounds need varsigma <= 0.073");
    r.conductance_lower = kConvexKappaConst * v * std::sqrt(s.m / (s.L * d));
    r.gap_lower = kConvexGapConst * v * v * s.m / (s.L * d);
  } else {
    const double e = rwm_gaussian_exponent(v, s.d);
    r.conductance_lower = kGaussKappaConst * std::exp(-e) * v / std::sqrt(d);
    r.gap_lower = r.conductance_lower * r.conductance_lower / 8.0;
  }
  r.gap_upper = v * v / (2.0 * d);
  if (!(r.gap_lower <= r.gap_upper)) fail(ErrorKind::NumericalFailure, "gap lower bound exceeds the upper bound");
  return r;
}

/// lim inf_d kappa_d(0) d^1/2 >= 0.00216 exp(-varsigma^2) varsigma
inline double rwm_gaussian_limit_constant(double varsigma) {
  return kGaussKappaConst * std::exp(-varsigma * varsigma) * varsigma;
}

// ---------------------------------------------------------------------------------------------
// Support lemmas

/// TV distance between N(x, sigma^2 Id) and N(y, sigma^2 Id) with |x - y| <= eps.
inline double proposal_tv_bound(double eps, double sigma) {
  if (!(eps >= 0.0 && sigma > 0.0)) fail(ErrorKind::DomainError, "need eps >= 0 and sigma > 0");
  return eps / (2.0 * sigma);
}

struct ChiSquareTail {
  double threshold = 0.0;
  double bound = 0.0;
};

/// P(W >= d + 2 sqrt(du) + 2u) <= e^-u for W ~ chi^2_d.
inline ChiSquareTail chi2_upper_tail(int d, double u) {
  return {d + 2.0 * std::sqrt(d * u) + 2.0 * u, std::exp(-u)};
}

/// P(W <= d - 2 sqrt(du)) <= e^-u.
inline ChiSquareTail chi2_lower_tail(int d, double u) { return {d - 2.0 * std::sqrt(d * u), std::exp(-u)}; }

/// Stationary acceptance probability of Gaussian RWM is at least
/// exp(-varsigma^2/2 [1 + 2 d^-1/2 + 2/d]) (1 - e^-1) / 2.
inline double gaussian_acceptance_lower(double varsigma, int d) {
  return std::exp(-0.5 * rwm_gaussian_exponent(varsigma, d)) * 0.5 * (1.0 - std::exp(-1.0));
}

/// Monte Carlo P(W >= threshold) (upper) or P(W <= threshold) (lower), W ~ chi^2_d.
inline McEstimate mc_chi2_tail(int d, double threshold, bool upper, std::uint64_t samples, std::uint64_t seed,
                               unsigned width = 1) {
  auto sums = detail::mc_run<1>(samples, seed, width, [&](CounterStream& rng) {
    double w = 0.0;
    for (int j = 0; j < d; ++j) {
      double z = rng.normal();
      w += z * z;
    }
    return std::array<double, 1>{(upper ? w >= threshold : w <= threshold) ? 1.0 : 0.0};
  });
  const double n = double(samples);
  return {detail::mc_mean(sums, 0, n), std::sqrt(detail::mc_cov(sums, 0, 0, n) / n), samples, seed};
}

/// Monte Carlo stationary acceptance probability E[1 ^ pi(Y)/pi(X)], X ~ pi.
inline McEstimate mc_acceptance(const RwmSpec& spec, std::uint64_t samples, std::uint64_t seed, unsigned width = 1) {
  RwmTarget target = rwm_target(spec);
  const double sd = spec.proposal_sd();
  auto sums = detail::mc_run<1>(samples, seed, width, [&](CounterStream& rng) {
    RVector x = target.sample(rng);
    RVector y(spec.d);
    for (int j = 0; j < spec.d; ++j) y(j) = x(j) + sd * rng.normal();
    return std::array<double, 1>{std::min(1.0, std::exp(target.U(x) - target.U(y)))};
  });
  const double n = double(samples);
  return {detail::mc_mean(sums, 0, n), std::sqrt(detail::mc_cov(sums, 0, 0, n) / n), samples, seed};
}

}  // namespace wpi
