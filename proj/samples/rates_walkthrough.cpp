// From a finite chain to a convergence profile: conductance, alpha, beta, gamma, and a comparison
// with the decay actually observed for one observable.

#include <cstdio>
#include <random>

#include "wpi/acceptance.hpp"

int main() {
  std::mt19937_64 rng(7);
  wpi::FiniteKernel P = wpi::random_reversible_chain(rng, 6);

  // The convergence statement for P^n needs the inequality for P*P.
  wpi::FiniteKernel T = wpi::adjoint_product(P);
  wpi::ConductanceProfile prof = wpi::weak_conductance(T);
  wpi::WpiCertificate alpha = wpi::cheeger_wpi(prof, 1.0, "P*P");
  wpi::WpiCertificate beta = wpi::alpha_to_beta(alpha);
  wpi::ConvergenceProfile gamma = wpi::gamma_from_beta(beta, 50);

  std::printf("kappa(0) = %.6g, spectral gap of P*P = %.6g\n", prof.kappa(0.0), wpi::spectral_gap(T));
  std::printf("alpha(0.01) = %.6g, beta(100) = %.6g\n", alpha.rate(0.01), beta.rate(100.0));

  wpi::Vector f(6);
  f << 1.0, -1.0, 0.5, 0.0, 2.0, -0.5;
  wpi::Observable obs(f, P.mu());
  auto decay = wpi::pn_decay(P, f, 50);
  std::printf("%4s  %14s  %14s\n", "n", "||P^n f||^2", "gamma(n) osc^2");
  for (std::size_t n = 0; n <= 50; n += 10)
    std::printf("%4zu  %14.6e  %14.6e\n", n, decay[n], gamma[n] * obs.osc_sq());

  auto var = wpi::asym_var_bound(wpi::k_transform(beta.rate), obs.variance, obs.osc_sq());
  std::printf("asymptotic variance %.6g <= bound %.6g\n", wpi::exact_asymptotic_variance(P, f), var.bound);
  return 0;
}
