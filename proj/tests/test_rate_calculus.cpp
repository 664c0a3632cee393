#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "wpi/rate_calculus.hpp"

using namespace wpi;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("alpha = 0 converts to beta = 0", "[convert]") {
  auto a = alpha_certificate(MonotoneRate::constant(0.0));
  auto b = alpha_to_beta(a);
  for (double s : {1e-6, 1.0, 1e6}) CHECK(b.rate(s) == 0.0);
}

TEST_CASE("beta = 1/s converts to alpha = 1/r cut at a", "[convert]") {
  auto b = beta_certificate(MonotoneRate::power_law(1.0, 1.0), 1.0);
  auto a = beta_to_alpha(b);
  for (double r : {1e-3, 0.1, 0.5, 0.999}) CHECK_THAT(a.rate(r), WithinRel(1.0 / r, 1e-12));
  CHECK(a.rate(1.0) == 0.0);
  CHECK(a.rate(3.0) == 0.0);
  // pointwise against the infimum definition on the cut rate
  auto beta = MonotoneRate::power_law(1.0, 1.0).with_cap(1.0);
  for (double r : {0.01, 0.2, 0.7})
    CHECK_THAT(a.rate(r), WithinRel(oracle::inverse_by_bisection([&](double s) { return beta(s); }, r), 1e-9));
}

TEST_CASE("alpha-beta roundtrip on power laws", "[convert]") {
  for (double p : {0.5, 1.0, 2.0, 3.5}) {
    auto b = beta_certificate(MonotoneRate::power_law(0.7, p).with_cap(1.0), 1.0);
    auto back = alpha_to_beta(beta_to_alpha(b));
    for (double s : log_grid(1e-3, 1e6, 50)) CHECK(std::abs(back.rate(s) - b.rate(s)) <= 1e-10 * std::max(1.0, b.rate(s)));
  }
}

TEST_CASE("alpha certificates must vanish at a", "[certificate]") {
  CHECK_THROWS_AS(alpha_certificate(MonotoneRate::power_law(1.0, 1.0)).validate(), Error);
  CHECK_NOTHROW(alpha_certificate(MonotoneRate::power_law(1.0, 1.0).with_cutoff(1.0)).validate());
}

TEST_CASE("conjugate of 1/s is v^2/4", "[conjugate]") {
  auto k = k_transform(MonotoneRate::power_law(1.0, 1.0));
  for (double v : {0.01, 0.3, 1.0}) {
    CHECK_THAT(k(v), WithinRel(v * v / 4.0, 1e-13));
    CHECK_THAT(k(v), WithinRel(oracle::conjugate_by_grid([](double s) { return 1.0 / s; }, v), 1e-6));
  }
}

TEST_CASE("conjugate of s^-p", "[conjugate]") {
  for (double p : {0.5, 1.5, 3.0}) {
    auto k = k_transform(MonotoneRate::power_law(1.0, p));
    for (double v : {0.05, 0.5, 1.0}) {
      double closed = p * std::pow(v / (1.0 + p), (1.0 + p) / p);
      CHECK_THAT(k(v), WithinRel(closed, 1e-12));
      CHECK_THAT(k(v), WithinRel(oracle::conjugate_by_grid([p](double s) { return std::pow(s, -p); }, v), 1e-4));
    }
  }
}

TEST_CASE("conjugate of the zero rate is infinite", "[conjugate]") {
  auto k = k_transform(MonotoneRate::constant(0.0));
  CHECK(std::isinf(k(0.1)));
  CHECK(k(0.0) == 0.0);
}

TEST_CASE("beta = 1/s gives gamma(n) = 4/(n+4)", "[gamma]") {
  auto g = gamma_from_beta(beta_certificate(MonotoneRate::power_law(1.0, 1.0)), 100);
  for (std::size_t n = 0; n <= 100; ++n) CHECK_THAT(g[n], WithinRel(4.0 / (n + 4.0), 1e-12));
  for (double n : {1.0, 10.0, 60.0})
    CHECK_THAT(g[std::size_t(n)], WithinRel(oracle::gamma_by_quadrature([](double v) { return v * v / 4.0; }, 1.0, n), 1e-6));
}

TEST_CASE("tabulated beta gives a dominating gamma", "[gamma]") {
  auto tab = tabulate_upper([](double s) { return 1.0 / s; }).with_cutoff(1e8);
  auto g = gamma_from_beta(beta_certificate(tab), 50);
  for (std::size_t n = 0; n <= 50; ++n) {
    CHECK(g[n] >= 4.0 / (n + 4.0) * (1 - 1e-12));
    CHECK(g[n] <= 4.0 / (n + 4.0) * 1.1);
  }
}

TEST_CASE("power beta gives the matching polynomial gamma exponent", "[gamma]") {
  const double p = 1.5;
  auto g = gamma_from_beta(beta_certificate(MonotoneRate::power_law(3.0, p).with_cap(1.0)), 20000);
  std::vector<double> n, y;
  for (std::size_t k = 2000; k <= 20000; k += 500) n.push_back(double(k)), y.push_back(g[k]);
  CHECK_THAT(loglog_slope(n, y), WithinAbs(-p, 0.05));
}

TEST_CASE("constant beta stalls", "[gamma]") {
  CHECK_THROWS_MATCHES(gamma_from_beta(beta_certificate(MonotoneRate::constant(0.5)), 10), Error,
                       oracle::is_kind(ErrorKind::NonVanishingGamma));
}

TEST_CASE("iterating v - K*(v)", "[iterate]") {
  auto k = k_transform(MonotoneRate::power_law(1.0, 1.0));
  auto v = iterate_bound(k, 1.0, 2);
  CHECK_THAT(v[1], WithinRel(0.75, 1e-14));
  CHECK_THAT(v[2], WithinRel(39.0 / 64.0, 1e-14));
  auto zero = ConjugateRate::power(0.0, 1.0, kInf);
  for (double x : iterate_bound(zero, 0.4, 5)) CHECK(x == 0.4);
}

TEST_CASE("iterates stay below gamma", "[iterate]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int t = 0; t < 100; ++t) {
    auto beta = MonotoneRate::power_law(unif(rng), unif(rng)).with_cap(1.0);
    auto g = gamma_from_beta(beta_certificate(beta), 60);
    auto v = iterate_bound(k_transform(beta), 1.0, 60);
    for (std::size_t n = 0; n <= 60; ++n) CHECK(v[n] <= g[n] * (1 + 1e-9) + 1e-15);
  }
}

TEST_CASE("recovering K* from 4/(n+4)", "[recover]") {
  ConvergenceProfile g;
  for (int n = 0; n <= 400; ++n) g.gamma.push_back(4.0 / (n + 4.0));
  auto k = beta_from_gamma(g, RecoveryMode::FForm);
  for (int n : {1, 5, 20, 100}) {
    double v = 4.0 / (n + 4.0);
    CHECK_THAT(k(v), WithinRel(v * v / (4.0 + v), 1e-10));
  }
  auto ki = beta_from_gamma(g, RecoveryMode::IterateForm);
  for (int n : {1, 5, 20, 100}) {
    double v = 4.0 / (n + 4.0);
    CHECK_THAT(ki(v), WithinRel(v * v / (4.0 + v), 1e-10));
  }
}

TEST_CASE("recovering K* from a geometric profile", "[recover]") {
  const double rho = 0.8;
  ConvergenceProfile g;
  for (int n = 0; n <= 60; ++n) g.gamma.push_back(std::pow(rho, n));
  for (auto mode : {RecoveryMode::IterateForm, RecoveryMode::ReversibleDecreasing}) {
    auto k = beta_from_gamma(g, mode);
    for (int n : {0, 3, 30}) {
      double v = std::pow(rho, n);
      CHECK_THAT(k(v), WithinRel((1.0 - rho) * v, 1e-10));
    }
  }
}

TEST_CASE("recovered K* is no stronger than the original", "[recover]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.3, 2.5);
  for (int t = 0; t < 30; ++t) {
    auto beta = MonotoneRate::power_law(unif(rng), unif(rng)).with_cap(1.0);
    auto k = k_transform(beta);
    auto g = gamma_from_beta(beta_certificate(beta), 300);
    auto back = beta_from_gamma(g, RecoveryMode::IterateForm);
    // compared at the knots gamma(n); between knots the recovery is a chord of a convex function
    for (std::size_t n = 0; n < 300; ++n) CHECK(back(g[n]) <= k(g[n]) * (1 + 1e-9) + 1e-15);
  }
}

TEST_CASE("profiles must be nonincreasing", "[recover]") {
  ConvergenceProfile g{{1.0, 0.5, 0.6}};
  CHECK_THROWS_AS(beta_from_gamma(g, RecoveryMode::IterateForm), Error);
}

TEST_CASE("L^p extension", "[gamma]") {
  ConvergenceProfile g;
  for (int n = 1; n <= 50; ++n) g.gamma.push_back(std::pow(double(n), -2.0));
  auto g4 = gamma_p_extend(g, 4.0);
  for (int n = 1; n <= 50; ++n) CHECK_THAT(g4.gamma[n - 1], WithinRel(32.0 / n, 1e-13));
  auto big = gamma_p_extend(g, 1e12);
  CHECK_THAT(big.gamma[3], WithinRel(16.0 * g.gamma[3], 1e-9));
  for (std::size_t n = 1; n < g4.gamma.size(); ++n) CHECK(g4.gamma[n] <= g4.gamma[n - 1]);
  CHECK_THROWS_AS(gamma_p_extend(g, 2.0), Error);
}

TEST_CASE("asymptotic variance integral", "[asymvar]") {
  const double rho = 0.6, v = 0.5, phi = 2.0;
  auto lin = ConjugateRate::power(1.0 - rho, 1.0, kInf);
  auto b = asym_var_bound(lin, v * phi, phi);
  CHECK_THAT(b.B, WithinRel(v / (1.0 - rho), 1e-12));
  CHECK_THAT(b.bound, WithinRel(4.0 * phi * v / (1.0 - rho), 1e-12));
  // w / (w^2/4) = 4/w is not integrable at 0
  auto quad = k_transform(MonotoneRate::power_law(1.0, 1.0));
  CHECK_THROWS_MATCHES(asym_var_bound(quad, 0.5, 1.0), Error,
                       oracle::is_kind(ErrorKind::DivergentB));
}

TEST_CASE("asymptotic variance bound dominates small chains", "[asymvar]") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    auto P = random_reversible_chain(rng, 3);
    auto beta = alpha_to_beta(cheeger_wpi(weak_conductance(adjoint_product(P)), 1.0, "P*P"));
    Vector f = oracle::random_vector(rng, 3);
    Observable o(f, P.mu());
    auto b = asym_var_bound(k_transform(beta.rate), o.variance, o.osc_sq());
    CHECK(exact_asymptotic_variance(P, f) <= b.bound * (1 + 1e-10));
  }
}

TEST_CASE("spectral mass bound", "[spectral]") {
  const double rho = 0.7;
  ConvergenceProfile geo;
  for (int n = 0; n <= 50; ++n) geo.gamma.push_back(std::pow(rho, n));
  CHECK_THAT(spectral_mass_bound(geo, -std::log(rho)), WithinRel(1.0, 1e-12));

  ConvergenceProfile poly;
  for (int n = 0; n <= 200000; ++n) poly.gamma.push_back(n == 0 ? 1.0 : std::pow(double(n), -1.5));
  std::vector<double> d, y;
  for (double delta : log_grid(1e-3, 1e-1, 12)) d.push_back(delta), y.push_back(spectral_mass_bound(poly, delta));
  CHECK_THAT(loglog_slope(d, y), WithinAbs(1.5, 0.05));
}

TEST_CASE("spectral mass bound dominates exact masses", "[spectral]") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    auto P = random_reversible_chain(rng, 4);
    auto g = gamma_from_beta(alpha_to_beta(cheeger_wpi(weak_conductance(adjoint_product(P)), 1.0, "P*P")), 400);
    Vector f = oracle::random_vector(rng, 4);
    Observable o(f, P.mu());
    auto nu = spectral_measure(P, o.centered());
    for (double delta : {0.01, 0.1, 0.5}) {
      double exact = nu.mass_where([&](double l) { return l * l > std::exp(-delta); });
      CHECK(exact <= spectral_mass_bound(g, delta) * o.osc_sq() * (1 + 1e-9) + 1e-15);
    }
  }
}

TEST_CASE("ordering certificates", "[order]") {
  auto c1 = beta_certificate(MonotoneRate::power_law(1.0, 2.0));
  CHECK(order_rates(c1, c1).order == RateOrder::Equal);
  auto c2 = beta_certificate(MonotoneRate::power_law(1.0, 1.0));
  auto cmp = order_rates(c2, c1, log_grid(1.0, 1e6, 100));
  CHECK(cmp.order == RateOrder::FirstDominates);
  auto g1 = gamma_from_beta(beta_certificate(MonotoneRate::power_law(1.0, 2.0).with_cap(1.0)), 100);
  auto g2 = gamma_from_beta(beta_certificate(MonotoneRate::power_law(1.0, 1.0).with_cap(1.0)), 100);
  for (std::size_t n = 0; n <= 100; ++n) CHECK(g2[n] >= g1[n] * (1 - 1e-12));
  CHECK(order_rates(c2, c1).order == RateOrder::Crossing);
  auto other = c1;
  other.sieve = Sieve::PNorm;
  other.sieve_p = 4.0;
  CHECK_THROWS_AS(order_rates(c1, other), Error);
}

TEST_CASE("lazy kernels order as their Dirichlet forms", "[order]") {
  std::mt19937_64 rng(4);
  auto P = random_reversible_chain(rng, 5);
  auto cert = [](const FiniteKernel& k) {
    return alpha_to_beta(cheeger_wpi(weak_conductance(adjoint_product(k)), 1.0, "P*P"));
  };
  auto lazy_cert = cert(lazy(P, 0.5)), plain = cert(P);
  auto cmp = order_rates(lazy_cert, plain, log_grid(1e-2, 1e4, 200));
  CHECK((cmp.order == RateOrder::FirstDominates || cmp.order == RateOrder::Equal));
}
