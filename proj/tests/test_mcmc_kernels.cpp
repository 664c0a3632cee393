#include <catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include "support.hpp"
#include "wpi/heavy_tail.hpp"

using namespace wpi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// ---------------------------------------------------------------------------------------------
// independence sampler

TEST_CASE("IMH closed-form spectrum", "[imh]") {
  ImhGeometric c{0.5, 0.25, 200};
  // (b/a)^m falls below the double epsilon near m = 53, so stay under that
  auto lam = imh_spectrum(c, 40);
  CHECK_THAT(lam[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(lam[1], WithinRel(0.375, 1e-14));
  for (std::size_t m = 1; m < lam.size(); ++m) CHECK(lam[m] > lam[m - 1]);
  CHECK(lam.back() < 1.0);
  CHECK(lam.back() > 1.0 - 1e-11);
  CHECK_THROWS_MATCHES(imh_spectrum(ImhGeometric{0.25, 0.5, 10}, 3), Error, oracle::is_kind(ErrorKind::DomainError));
}

TEST_CASE("IMH matrix is reversible for the truncated target", "[imh]") {
  ImhGeometric c{0.6, 0.3, 80};
  auto k = imh_build(c);
  CHECK(k.reversibility_defect() <= 1e-12);
  double norm = (1.0 - std::pow(0.6, 81));
  for (int x = 0; x <= 80; x += 10) CHECK_THAT(k.mu()(x), WithinRel(0.4 * std::pow(0.6, x) / norm, 1e-10));
}

TEST_CASE("IMH eigenvalues match the closed form", "[imh]") {
  auto v = imh_spectrum_validate(ImhGeometric{0.5, 0.25, 200}, 20);
  CHECK(v.max_residual <= 1e-8);
  CHECK(v.formula.size() == 20);
  CHECK_THROWS_MATCHES(imh_spectrum_validate(ImhGeometric{0.5, 0.25, 25}, 20), Error,
                       oracle::is_kind(ErrorKind::TruncationTooSmall));
  // a larger truncation is at least as accurate
  auto small = imh_spectrum_validate(ImhGeometric{0.5, 0.25, 60}, 20, 1.0);
  CHECK(v.max_residual <= small.max_residual + 1e-15);
}

TEST_CASE("IMH asymptotic-variance criterion", "[imh]") {
  ImhGeometric c{0.5, 0.25, 120};
  auto k = imh_build(c);
  auto sp = symmetric_spectrum(k);
  // an eigenfunction away from 1 carries a single atom
  Vector eig = sp.eigenvectors.col(0).cwiseQuotient(sp.sqrt_mu);
  auto rep = imh_asymvar_criterion(c, eig);
  CHECK(rep.verdict == AsymVarVerdict::Finite);
  // indicator masses against the spectral measure computed here
  Vector f = Vector::Zero(k.size());
  for (int x = 6; x < k.size(); ++x) f(x) = 1.0;
  auto tail = imh_asymvar_criterion(c, f);
  auto nu = spectral_measure(sp, Vector(f.array() - k.mu().dot(f)));
  REQUIRE(tail.mass.size() + 1 == nu.mass.size());
  for (std::size_t m = 0; m < tail.mass.size(); ++m) CHECK_THAT(tail.mass[m], WithinAbs(nu.mass[m], 1e-14));
  CHECK_THAT(tail.critical_rate, WithinRel(std::log(2.0), 1e-14));
  for (std::size_t m = 1; m < tail.partial_sums.size(); ++m) CHECK(tail.partial_sums[m] >= tail.partial_sums[m - 1]);
}

// ---------------------------------------------------------------------------------------------
// pseudo-marginal ABC

TEST_CASE("ABC joint chain", "[abc]") {
  AbcChain c{0.5, 0.5, 2, 12};
  auto k = abc_build(c);
  CHECK(k.size() == c.states());
  CHECK(k.reversibility_defect() <= 1e-12);
  // the x-marginal is the truncated posterior (1 - aq)(aq)^(x-1)
  double norm = 0.0;
  for (int x = 1; x <= c.max_x; ++x) norm += c.posterior(x);
  for (int x = 1; x <= c.max_x; ++x) {
    double m = 0.0;
    for (int j = 1; j <= c.N; ++j) m += k.mu()(c.index(x, j));
    CHECK_THAT(m, WithinRel(c.posterior(x) / norm, 1e-9));
  }
  CHECK_THAT(c.posterior(3), WithinRel(0.75 * 0.0625, 1e-15));
}

TEST_CASE("ABC floor exponent", "[abc]") {
  AbcChain c{0.5, 0.5, 1, 14};
  CHECK_THAT(abc_floor_exponent(c), WithinRel(2.0, 1e-14));
  CHECK_THAT(abc_beta_floor(c).as<PowerLaw>().p, WithinRel(2.0, 1e-14));
  CHECK_THROWS_MATCHES(abc_floor_exponent(AbcChain{1.0, 0.5, 1, 14}), Error, oracle::is_kind(ErrorKind::DomainError));
}

TEST_CASE("ABC conductance sits under its envelope", "[abc]") {
  AbcChain c{0.5, 0.5, 1, 14};
  auto prof = weak_conductance(abc_build(c));
  for (double u : log_grid(1e-6, c.a * c.q / 4.0 * 0.99, 20)) CHECK(prof.kappa(u) <= abc_kappa_envelope(c, u) * (1 + 1e-12));
}

// ---------------------------------------------------------------------------------------------
// level walk

namespace {
LevelWalk geometric_walk(int i0) {
  std::vector<double> nu;
  for (int i = 1; i <= i0; ++i) nu.push_back(std::pow(0.5, i));
  return level_walk_build(nu);
}
}  // namespace

TEST_CASE("level walk stationary law", "[level-walk]") {
  auto w = geometric_walk(4);
  Vector solved = FiniteKernel::stationary(w.P.P());
  CHECK((solved - w.P.mu()).cwiseAbs().maxCoeff() < 1e-10);
  double z = 0.0;
  for (int i = 1; i <= 4; ++i) z += i * w.nu[i - 1];
  CHECK_THAT(w.P.mu()(w.index(3, 2)), WithinRel(w.nu[2] / z, 1e-14));
  CHECK((adjoint(w.P).P() - w.P_adj.P()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("level walk reducibility", "[level-walk]") {
  auto w = geometric_walk(3);
  auto one = level_walk_power_product(w, 1);
  auto rep = rupi_check(one);
  CHECK_FALSE(rep.irreducible);
  CHECK(rupi_check(level_walk_power_product(w, 3)).irreducible);
  CHECK_THAT(dirichlet_form(one, level_walk_witness(w, 1)), WithinAbs(0.0, 1e-15));
  CHECK(mu_norm_sq(level_walk_witness(w, 1), w.P.mu()) > 0.0);
}

TEST_CASE("level walk needs two charged levels", "[level-walk]") {
  CHECK_THROWS_MATCHES(level_walk_build({1.0}), Error, oracle::is_kind(ErrorKind::BadSupport));
  CHECK_THROWS_MATCHES(level_walk_build({0.5, 0.0, 0.5}), Error, oracle::is_kind(ErrorKind::BadSupport));
}

// ---------------------------------------------------------------------------------------------
// random-walk Metropolis

TEST_CASE("Philox4x32-10 known-answer vectors", "[rng]") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::apply(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::apply(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter streams are pure functions of seed and stream", "[rng]") {
  CounterStream a(42, 7), b(42, 7), c(42, 8);
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    sum += x - c.uniform();
  }
  CHECK(std::abs(sum) < 60.0);
}

TEST_CASE("Monte Carlo results do not depend on the width", "[rwm]") {
  auto s = rwm_preset(RwmPotential::Gaussian, 6, 1.0);
  auto one = mc_acceptance(s, 20000, 5, 1), four = mc_acceptance(s, 20000, 5, 4);
  CHECK(one.value == four.value);
  CHECK(one.stderr_ == four.stderr_);
  std::vector<RwmSet> sets{{RwmSetKind::HalfSpace, 0.0}};
  auto a = rwm_conductance_mc(s, sets, 10000, 9, 1), b = rwm_conductance_mc(s, sets, 10000, 9, 3);
  CHECK(a[0].kappa.value == b[0].kappa.value);
}

TEST_CASE("empty set has zero flow", "[rwm]") {
  auto s = rwm_preset(RwmPotential::Gaussian, 3, 1.0);
  auto est = rwm_conductance_mc(s, {{RwmSetKind::Empty, 0.0}}, 5000, 1);
  CHECK(est[0].flow.value == 0.0);
  CHECK(est[0].product.value == 0.0);
}

TEST_CASE("half-space conductance stays under its ceiling", "[rwm]") {
  for (int d : {2, 8}) {
    auto s = rwm_preset(RwmPotential::Gaussian, d, std::sqrt(0.5));
    auto est = rwm_conductance_mc(s, {{RwmSetKind::HalfSpace, 0.0}}, 100000, 3);
    CHECK_THAT(est[0].product.value, WithinAbs(0.25, 5 * est[0].product.stderr_ + 1e-3));
    CHECK(est[0].kappa.value - 3 * est[0].kappa.stderr_ <= rwm_halfspace_kappa_ceiling(s));
    CHECK(est[0].kappa.value >= rwm_gap_bounds(s, RwmRegime::Gaussian).conductance_lower);
  }
}

TEST_CASE("ball acceptance stays under its ceiling", "[rwm]") {
  auto s = rwm_preset(RwmPotential::Gaussian, 64, 1.0);
  double r = rwm_ball_radius(s);
  auto acc = mc_ball_acceptance(s, r, 20000, 4);
  CHECK(acc.value - 3 * acc.stderr_ <= rwm_ball_acceptance_ceiling(s));
}

TEST_CASE("gap bounds", "[rwm]") {
  RwmSpec convex;
  convex.d = 100, convex.varsigma = 0.073, convex.m = convex.L = 1.0;
  auto g = rwm_gap_bounds(convex, RwmRegime::GeneralConvex);
  CHECK_THAT(g.gap_lower, WithinRel(8.94e-10 * 0.073 * 0.073 * 1e-2, 1e-12));
  CHECK(g.gap_lower <= g.gap_upper);
  convex.varsigma = 0.1;
  CHECK_THROWS_MATCHES(rwm_gap_bounds(convex, RwmRegime::GeneralConvex), Error,
                       oracle::is_kind(ErrorKind::RegimeViolation));
  auto s = rwm_preset(RwmPotential::Gaussian, 50, 0.8);
  CHECK_THAT(rwm_gap_bounds(s, RwmRegime::Gaussian).gap_upper, WithinRel(0.64 / 100.0, 1e-14));
  CHECK_THAT(rwm_gaussian_limit_constant(std::sqrt(0.5)), WithinAbs(0.000926, 5e-7));
  for (double v : {0.05, 0.5, 1.0, 3.0})
    for (int d : {1, 10, 1000}) {
      auto b = rwm_gap_bounds(rwm_preset(RwmPotential::Gaussian, d, v), RwmRegime::Gaussian);
      CHECK(b.gap_lower <= b.gap_upper);
    }
}

TEST_CASE("support lemmas", "[rwm]") {
  CHECK(proposal_tv_bound(0.3, 0.3) == 0.5);
  auto up = chi2_upper_tail(10, 1.0);
  CHECK_THAT(up.threshold, WithinAbs(18.32, 0.005));
  CHECK_THAT(up.bound, WithinRel(std::exp(-1.0), 1e-15));
  boost::math::chi_squared chi2(10);
  double exact = boost::math::cdf(boost::math::complement(chi2, up.threshold));
  CHECK(exact <= up.bound);
  auto mc = mc_chi2_tail(10, up.threshold, true, 1000000, 11);
  CHECK_THAT(mc.value, WithinAbs(exact, 3 * mc.stderr_));
  auto lo = chi2_lower_tail(10, 1.0);
  CHECK(boost::math::cdf(chi2, lo.threshold) <= lo.bound);

  double bound = gaussian_acceptance_lower(1.0, 4);
  CHECK_THAT(bound, WithinRel(std::exp(-1.25) * 0.5 * (1 - std::exp(-1.0)), 1e-14));
  auto acc = mc_acceptance(rwm_preset(RwmPotential::Gaussian, 4, 1.0), 200000, 2);
  CHECK(bound <= acc.value - 3 * acc.stderr_);
}

TEST_CASE("logistic demo target", "[rwm]") {
  auto s = rwm_preset(RwmPotential::LogisticDemo, 5, 0.5);
  CHECK(s.L > s.m);
  auto t = rwm_target(s);
  CounterStream rng(1, 0);
  RVector x = t.sample(rng);
  RVector g = t.grad(x);
  for (int j = 0; j < 5; ++j) {
    RVector e = RVector::Zero(5);
    e(j) = 1e-6;
    CHECK_THAT(g(j), WithinAbs((t.U(x + e) - t.U(x - e)) / 2e-6, 1e-6));
  }
}

// ---------------------------------------------------------------------------------------------
// heavy tails

TEST_CASE("heavy-tail floor", "[heavy-tail]") {
  CHECK_THAT((HeavyTail{2.0, 1.0, 1.0}.floor_exponent()), WithinRel(4.0, 1e-15));
  CHECK_THAT((HeavyTail{2.0, 1e9, 1.0}.floor_exponent()), WithinRel(2.0, 1e-8));
  auto fl = heavy_tail_floor(HeavyTail{2.0, 1.0, 1.0});
  CHECK_THAT(fl.limit_estimate, WithinRel(3.0, 0.01));
  CHECK(fl.limit_exact == 3.0);
  std::vector<double> s, b;
  for (double x : log_grid(1e6, 1e30, 30)) s.push_back(x), b.push_back(fl.beta_floor(x));
  CHECK_THAT(loglog_slope(s, b), WithinAbs(-4.0, 0.1));
  CHECK_THROWS_MATCHES(heavy_tail_floor(HeavyTail{-1.0, 1.0, 1.0}), Error, oracle::is_kind(ErrorKind::DomainError));
}

// ---------------------------------------------------------------------------------------------
// CLT

namespace {
ConvergenceProfile power_profile(double a, int n_max) {
  ConvergenceProfile g;
  g.gamma.push_back(1.0);
  for (int n = 1; n <= n_max; ++n) g.gamma.push_back(std::pow(double(n), -a));
  return g;
}
}  // namespace

TEST_CASE("CLT verdicts from profiles", "[clt]") {
  ConvergenceProfile geo;
  for (int n = 0; n <= 200; ++n) geo.gamma.push_back(std::pow(0.9, n));
  CHECK(clt_check(geo).verdict == CltVerdict::Converges);
  auto r15 = clt_check(power_profile(1.5, 2000));
  CHECK(r15.verdict == CltVerdict::Converges);
  CHECK_THAT(r15.slope_a, WithinAbs(1.5, 0.02));
  CHECK(clt_check(power_profile(0.5, 2000)).verdict == CltVerdict::NotEstablished);
  CHECK(clt_check(power_profile(1.0, 2000)).verdict == CltVerdict::Inconclusive);
}

TEST_CASE("CLT partial sums follow the growth bound", "[clt]") {
  const double a = 1.5;
  double vn = 0.0;
  for (int n = 1; n <= 5000; ++n) {
    vn += n == 1 ? 1.0 : std::pow(double(n - 1), -a / 2.0);
    CHECK(vn <= clt_vn_growth_bound(a, n) + 1.0);
  }
  CHECK(clt_lp_threshold(2.0) == 4.0);
  CHECK_THROWS_AS(clt_lp_threshold(1.0), Error);
}

TEST_CASE("exact CLT check on a finite chain", "[clt]") {
  auto k = oracle::two_state(0.2, 0.4);
  Vector f(2);
  f << 1.0, -1.0;
  auto r = clt_check(k, f, 200);
  CHECK(r.exact);
  CHECK(r.verdict == CltVerdict::Converges);
  CHECK(r.partial_sums.size() == 200);
}
