#include <catch_amalgamated.hpp>

#include "support.hpp"
#include "wpi/serialization.hpp"

using namespace wpi;

namespace {

/// Serialise, print, parse and deserialise, as a file round trip would.
template <class T, class Read>
auto through_text(const T& value, Read read) {
  return read(json::parse(to_json(value).dump()));
}

void same_rate(const MonotoneRate& a, const MonotoneRate& b) {
  for (double s : log_grid(1e-6, 1e8, 200)) CHECK(a(s) == b(s));
}

}  // namespace

TEST_CASE("non-finite numbers survive JSON", "[json]") {
  CHECK(num_from_json(json::parse(num_to_json(kInf).dump())) == kInf);
  CHECK(num_from_json(json::parse(num_to_json(-kInf).dump())) == -kInf);
  CHECK(std::isnan(num_from_json(json::parse(num_to_json(std::nan("")).dump()))));
  CHECK(num_from_json(json::parse(num_to_json(0.1).dump())) == 0.1);
  CHECK_THROWS_AS(num_from_json(json("many")), Error);
}

TEST_CASE("every rate form round-trips bit-exactly", "[json]") {
  std::vector<MonotoneRate> rates{
      MonotoneRate::power_law(1.0 / 3.0, 1.7).with_cap(2.5),
      MonotoneRate::exp_power(2.0, 0.3, 0.9).with_cutoff(1e5),
      MonotoneRate(LogPower{2.0, 1.0, 2.0}),
      MonotoneRate::constant(0.25).with_floor(0.1),
      MonotoneRate::tabulated({0.5, 1.0, 4.0}, {3.0, 2.0, 0.0}, TabMode::Linear),
      MonotoneRate::tabulated({1.0, 2.0}, {3.0, 1.0}),
  };
  for (const auto& r : rates) {
    auto back = through_text(r, rate_from_json);
    same_rate(r, back);
    CHECK(back.floor() == r.floor());
    CHECK(back.cap() == r.cap());
    CHECK(back.cutoff() == r.cutoff());
  }
  CHECK_THROWS_AS(rate_from_json(json{{"form", "spline"}}), Error);
}

TEST_CASE("command-line rate specs", "[json]") {
  same_rate(rate_from_spec("powerlaw:1,1"), MonotoneRate::power_law(1.0, 1.0));
  same_rate(rate_from_spec("exp:2,0.5,1"), MonotoneRate::exp_power(2.0, 0.5, 1.0));
  same_rate(rate_from_spec("const:0.5"), MonotoneRate::constant(0.5));
  CHECK_THROWS_AS(rate_from_spec("powerlaw:1"), Error);
  CHECK_THROWS_AS(rate_from_spec("powerlaw:1,x"), Error);
  CHECK_THROWS_AS(rate_from_spec("cubic:1"), Error);
}

TEST_CASE("certificates round-trip", "[json]") {
  auto beta = beta_certificate(MonotoneRate::power_law(1.0, 2.0), 1.0, "test", "P*P");
  auto back = through_text(beta, certificate_from_json);
  CHECK(back.param == Parametrization::Beta);
  CHECK(back.kernel == "P*P");
  CHECK(back.origin == "test");
  same_rate(beta.rate, back.rate);

  std::mt19937_64 rng(1);
  auto alpha = cheeger_wpi(weak_conductance(random_reversible_chain(rng, 5)));
  auto aback = through_text(alpha, certificate_from_json);
  CHECK(aback.param == Parametrization::Alpha);
  same_rate(alpha.rate, aback.rate);

  auto pn = beta;
  pn.sieve = Sieve::PNorm;
  pn.sieve_p = 4.0;
  auto pback = through_text(pn, certificate_from_json);
  CHECK(pback.sieve == Sieve::PNorm);
  CHECK(pback.sieve_p == 4.0);
  CHECK_THROWS_AS(certificate_from_json(json{{"param", "gamma"}, {"rate", to_json(beta.rate)}}), Error);
}

TEST_CASE("profiles round-trip and are checked", "[json]") {
  ConvergenceProfile g{{1.0, 0.8, 0.5, 0.4}, "x"};
  auto back = through_text(g, profile_from_json);
  CHECK(back.gamma == g.gamma);
  CHECK_THROWS_AS(profile_from_json(json{{"gamma", {1.0, 0.5, 0.7}}}), Error);
}

TEST_CASE("kernels round-trip", "[json]") {
  std::mt19937_64 rng(2);
  auto k = random_reversible_chain(rng, 6);
  auto back = through_text(k, kernel_from_json);
  CHECK(back.P() == k.P());
  CHECK(back.mu() == k.mu());
  auto solved = kernel_from_json(json{{"P", {{0.5, 0.5}, {0.25, 0.75}}}});
  CHECK(std::abs(solved.mu()(0) - 1.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(kernel_from_json(json{{"P", {{0.5, 0.5}, {1.0}}}}), Error);
  CHECK_THROWS_AS(kernel_from_json(json{{"Q", 1}}), Error);
}

TEST_CASE("conductance profiles round-trip", "[json]") {
  std::mt19937_64 rng(3);
  auto prof = weak_conductance(random_reversible_chain(rng, 7));
  auto back = through_text(prof, conductance_from_json);
  for (double u : {0.0, 0.05, 0.2}) CHECK(back.kappa(u) == prof.kappa(u));
  CHECK(back.witness(0.0) == prof.witness(0.0));
}

TEST_CASE("RWM specs and estimates", "[json]") {
  auto s = rwm_preset(RwmPotential::LogisticDemo, 5, 0.5);
  auto back = through_text(s, rwm_spec_from_json);
  CHECK(back.d == 5);
  CHECK(back.L == s.L);
  CHECK(back.potential == RwmPotential::LogisticDemo);
  auto j = to_json(McEstimate{0.5, 0.01, 1000, 42});
  CHECK(j.at("n_samples") == 1000);
  CHECK(j.at("stderr") == 0.01);
  CHECK_THROWS_AS(rwm_spec_from_json(json{{"potential", "cauchy"}}), Error);
}

TEST_CASE("drift conditions round-trip", "[json]") {
  Vector V(3);
  V << 1.0, 2.0, 4.0;
  auto geo = through_text(DriftCondition::geometric(V, {0}, 0.5, 1.0), drift_from_json);
  CHECK(geo.form == DriftForm::Geometric);
  CHECK(geo.lambda == 0.5);
  auto pw = through_text(DriftCondition::power_law(V, {0, 1}, 0.3, 0.6, 2.0), drift_from_json);
  CHECK(pw.power->second == 0.6);
  CHECK(pw.C == std::vector<int>{0, 1});
  CHECK_THROWS_AS(to_json(DriftCondition::subgeometric(V, {0}, [](double v) { return std::sqrt(v); }, 1.0)), Error);
}
