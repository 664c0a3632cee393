#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "wpi/chain_tools.hpp"

using namespace wpi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double inner(const Vector& f, const Vector& g, const Vector& mu) { return mu.dot(f.cwiseProduct(g)); }

/// Var(f) - sum over spectral atoms, directly: <f,f> - <f, P^n f> summed by brute matrix powers.
double asymvar_by_series(const FiniteKernel& k, const Vector& f, int terms) {
  Vector c = f.array() - k.mu().dot(f);
  double s = inner(c, c, k.mu());
  Vector g = c;
  for (int n = 1; n <= terms; ++n) {
    g = k.P() * g;
    s += 2.0 * inner(c, g, k.mu());
  }
  return s;
}

}  // namespace

TEST_CASE("kernels validate rows and invariance", "[kernel]") {
  Matrix bad(2, 2);
  bad << 0.5, 0.6, 0.3, 0.7;
  CHECK_THROWS_MATCHES(FiniteKernel(bad), Error, oracle::is_kind(ErrorKind::InvalidInput));
  Matrix P(2, 2);
  P << 0.7, 0.3, 0.3, 0.7;
  Vector wrong(2);
  wrong << 0.9, 0.1;
  CHECK_THROWS_MATCHES(FiniteKernel(P, wrong), Error, oracle::is_kind(ErrorKind::InvalidInput));
}

TEST_CASE("stationary law agrees with power iteration", "[kernel]") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    Matrix P = oracle::random_stochastic(rng, 6);
    FiniteKernel k(P);
    Vector mu = Vector::Constant(6, 1.0 / 6.0);
    for (int i = 0; i < 2000; ++i) mu = (mu.transpose() * P).transpose();
    CHECK((k.mu() - mu).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("two-state chain", "[kernel]") {
  auto k = oracle::two_state(0.3, 0.3);
  Vector f(2);
  f << 1.0, 0.0;
  CHECK_THAT(dirichlet_form(k, f), WithinRel(0.15, 1e-14));
  CHECK_THAT(spectral_gap(k), WithinRel(0.6, 1e-12));
  for (double p : {0.05, 0.3, 0.7}) {
    auto kp = oracle::two_state(p, p);
    Observable o(f, kp.mu());
    CHECK_THAT(exact_asymptotic_variance(kp, f), WithinRel(o.variance * (2.0 - 2.0 * p) / (2.0 * p), 1e-10));
  }
  auto k2 = oracle::two_state(0.2, 0.5);
  auto dec = pn_decay(k2, f, 10);
  double lam = 1.0 - 0.2 - 0.5;
  for (int n = 0; n <= 10; ++n) CHECK_THAT(dec[n], WithinRel(dec[0] * std::pow(lam, 2.0 * n), 1e-10));
}

TEST_CASE("adjoint is the mu-adjoint", "[kernel]") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    FiniteKernel k(oracle::random_stochastic(rng, 5));
    auto a = adjoint(k);
    Vector f = oracle::random_vector(rng, 5), g = oracle::random_vector(rng, 5);
    CHECK_THAT(inner(k.P() * f, g, k.mu()), WithinAbs(inner(f, a.P() * g, k.mu()), 1e-13));
    CHECK(additive_reversibilization(k).is_reversible(1e-12));
    CHECK(adjoint_product(k).is_reversible(1e-12));
  }
}

TEST_CASE("adjoint needs full support", "[kernel]") {
  Matrix P(2, 2);
  P << 1.0, 0.0, 0.5, 0.5;
  FiniteKernel k(P);
  CHECK_THROWS_MATCHES(adjoint(k), Error, oracle::is_kind(ErrorKind::ZeroMassState));
  auto sr = restrict_to_support(k);
  CHECK(sr.kernel.size() == 1);
  CHECK(sr.states == std::vector<int>{0});
}

TEST_CASE("Dirichlet forms match their definitions", "[dirichlet]") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    FiniteKernel k(oracle::random_stochastic(rng, 5));
    Vector f = oracle::random_vector(rng, 5);
    Vector c = f.array() - k.mu().dot(f);
    // <(I - P) f, f> for the quadratic form, which only sees the symmetric part
    CHECK_THAT(dirichlet_form(k, f), WithinAbs(inner(c - k.P() * c, c, k.mu()), 1e-13));
    Matrix PP = adjoint(k).P() * k.P();
    CHECK_THAT(dirichlet_form_adjoint_product(k, f), WithinAbs(inner(c - PP * c, c, k.mu()), 1e-13));
    auto d = dirichlet_pp_bounds(lazy(k, 0.25), f);
    CHECK(d.upper_ok);
    CHECK(d.lower_ok);
  }
}

TEST_CASE("powers and laziness", "[kernel]") {
  std::mt19937_64 rng(4);
  FiniteKernel k(oracle::random_stochastic(rng, 4));
  Matrix brute = Matrix::Identity(4, 4);
  for (int i = 0; i < 7; ++i) brute = brute * k.P();
  CHECK((matrix_power(k, 7).P() - brute).cwiseAbs().maxCoeff() < 1e-14);
  auto l = lazy(k, 0.5);
  CHECK(l.min_holding() >= 0.5);
  CHECK_THROWS_AS(lazy(k, 1.5), Error);
}

TEST_CASE("spectral measure reproduces moments", "[spectral]") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto k = random_reversible_chain(rng, 6);
    Vector f = oracle::random_vector(rng, 6);
    Observable o(f, k.mu());
    Vector c = o.centered();
    auto nu = spectral_measure(k, c);
    CHECK_THAT(nu.total(), WithinAbs(o.variance, 1e-13));
    Vector g = c;
    for (int n = 1; n <= 6; ++n) {
      g = k.P() * g;
      CHECK_THAT(nu.moment(n), WithinAbs(inner(g, c, k.mu()), 1e-12));
    }
    CHECK_THAT(exact_asymptotic_variance(k, f), WithinRel(asymvar_by_series(k, f, 4000), 1e-6));
  }
}

TEST_CASE("spectral tools reject nonreversible kernels and mass at one", "[spectral]") {
  Matrix P(3, 3);
  P << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK_THROWS_MATCHES(symmetric_spectrum(FiniteKernel(P)), Error, oracle::is_kind(ErrorKind::NotReversible));
  Matrix B(2, 2);
  B << 1, 0, 0, 1;
  Vector mu(2);
  mu << 0.5, 0.5;
  Vector f(2);
  f << 1.0, 0.0;
  CHECK_THROWS_MATCHES(exact_asymptotic_variance(FiniteKernel(B, mu), f), Error, oracle::is_kind(ErrorKind::MassAtOne));
}

TEST_CASE("irreducibility check", "[rupi]") {
  std::mt19937_64 rng(6);
  auto k = random_reversible_chain(rng, 5);
  CHECK(rupi_check(k).irreducible);
  Matrix B = Matrix::Zero(4, 4);
  B.topLeftCorner(2, 2) << 0.5, 0.5, 0.5, 0.5;
  B.bottomRightCorner(2, 2) << 0.5, 0.5, 0.5, 0.5;
  Vector mu = Vector::Constant(4, 0.25);
  auto rep = rupi_check(FiniteKernel(B, mu));
  CHECK_FALSE(rep.irreducible);
  CHECK((rep.from < 2) != (rep.to < 2));
}

TEST_CASE("restrictions", "[restriction]") {
  std::mt19937_64 rng(7);
  auto k = random_reversible_chain(rng, 6);
  auto r = restrict(k, {0, 2, 3});
  CHECK(r.mu_invariant);
  CHECK(r.kernel.is_reversible(1e-12));
  CHECK_THAT(r.mass, WithinAbs(k.mu()(0) + k.mu()(2) + k.mu()(3), 1e-15));
  CHECK(restricted_gap(k, {1}).value() == kInf);
  CHECK_THROWS_MATCHES(restrict(k, {}), Error, oracle::is_kind(ErrorKind::EmptyRestriction));
  CHECK_FALSE(restricted_gap(FiniteKernel(oracle::random_stochastic(rng, 4)), {0, 1}).has_value());
}

TEST_CASE("restriction certificates are valid inequalities", "[restriction]") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    auto k = random_reversible_chain(rng, 6);
    std::vector<std::vector<int>> family{{0, 1, 2, 3, 4, 5}, {0, 1, 2}, {3, 4, 5}, {0, 1, 2, 3}, {1}};
    auto cert = wpi_from_restrictions(k, family);
    for (int j = 0; j < 30; ++j) {
      Vector f = oracle::random_vector(rng, 6);
      Observable o(f, k.mu());
      double e = dirichlet_form(k, f);
      for (double s : log_grid(1e-2, 1e4, 40))
        CHECK(o.variance <= s * e + cert.rate(s) * o.osc_sq() * (1 + 1e-10) + 1e-14);
    }
  }
}

TEST_CASE("phi_beta closed form agrees with the grid search", "[sieve]") {
  for (double a : {0.5, 1.0, 2.5}) {
    auto beta = MonotoneRate::power_law(1.3, a);
    auto capped = MonotoneRate::tabulated(log_grid(1e-6, 1e8, 20000), [&] {
      std::vector<double> v;
      for (double s : log_grid(1e-6, 1e8, 20000)) v.push_back(beta(s));
      return v;
    }(), TabMode::Linear);
    for (double delta : {1e-3, 0.1}) {
      double closed = phi_beta_value(2.0, delta, beta);
      double brute = 0.0;
      for (double s : log_grid(1e-8 / delta, 1.0 / delta, 100000)) brute = std::max(brute, 2.0 * (1 - s * delta) / beta(s));
      CHECK_THAT(closed, WithinRel(brute, 1e-6));
      CHECK_THAT(phi_beta_value(2.0, delta, capped), WithinRel(closed, 1e-3));
    }
  }
  CHECK(std::isinf(phi_beta_value(1.0, 0.0, MonotoneRate::power_law(1.0, 1.0))));
  CHECK_THROWS_MATCHES(phi_beta_value(0.0, 0.1, MonotoneRate::power_law(1.0, 1.0)), Error,
                       oracle::is_kind(ErrorKind::ZeroFunction));
}

TEST_CASE("phi_beta along the orbit from moments and from the spectral measure", "[sieve]") {
  std::mt19937_64 rng(9);
  auto k = lazy(random_reversible_chain(rng, 5), 0.5);
  Vector f = oracle::random_vector(rng, 5);
  Vector c = f.array() - k.mu().dot(f);
  auto beta = MonotoneRate::power_law(1.0, 1.0);
  auto a = phi_beta_eval(k, f, beta, 20);
  auto b = phi_beta_eval(spectral_measure(k, c), beta, 20);
  REQUIRE(a.per_n.size() == b.per_n.size());
  for (std::size_t n = 0; n < a.per_n.size(); ++n) CHECK_THAT(a.per_n[n], WithinRel(b.per_n[n], 1e-8));
  CHECK(a.value == *std::max_element(a.per_n.begin(), a.per_n.end()));
}

TEST_CASE("sticky set bound is the supremum over holding thresholds", "[sticky]") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    auto k = lazy(random_reversible_chain(rng, 6), 0.3);
    for (double s : {0.5, 2.0, 10.0}) {
      double brute = 0.0;
      for (double eps : log_grid(1e-6, 1.0, 20000)) {
        double m = 0.0;
        for (int x = 0; x < 6; ++x)
          if (k.P()(x, x) >= 1.0 - eps) m += k.mu()(x);
        brute = std::max(brute, m * (1.0 - s * eps - m));
      }
      CHECK(sticky_set_bound(k, s) >= brute - 1e-12);
      CHECK(sticky_set_bound(k, s) <= brute + 1e-3);
    }
  }
}

TEST_CASE("sticky polynomial floor", "[sticky]") {
  StickyFloor fl{1.0, 1.0, 1.0};
  // alpha = 1: k = 1/2, formula = s^-1/2 (1/2 - s^-1/2)
  CHECK_THAT(fl.formula(4.0), WithinRel(0.125 * (0.5 - 0.125), 1e-14));
  auto floor = sticky_polynomial_floor([](double e) { return e; }, 1.0, 1.0, 1.0, {1e-3, 1e-2, 0.1});
  for (double s : log_grid(1e-2, 1e10, 200)) CHECK(floor(s) <= fl.hull(s) + 1e-15);
  CHECK_THROWS_MATCHES(sticky_polynomial_floor([](double e) { return 3 * e; }, 1.0, 1.0, 2.0, {0.1}), Error,
                       oracle::is_kind(ErrorKind::BracketViolation));
}
