#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wpi/acceptance.hpp"
#include "wpi/wpi.hpp"

namespace {

using wpi::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitAssertion = 2;

/// A certified bound was violated; the message carries the witness.
struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string command;
  std::string input;
  std::string output;
  std::uint64_t seed = 42;
  unsigned parallelism = 1;
  std::optional<double> tol;

  double tol_or(double fallback) const { return tol.value_or(fallback); }

  json meta() const {
    json m = {{"command", command}, {"seed", seed}, {"parallelism", parallelism}};
    if (tol) m["tol"] = wpi::num_to_json(*tol);
    return m;
  }
  std::string csv_meta() const {
    std::string s = "# wpi_cli " + command + " seed=" + std::to_string(seed) + " parallelism=" + std::to_string(parallelism);
    if (tol) s += " tol=" + wpi::fmt17(*tol);
    return s + "\n";
  }
};

json read_json(const std::string& path) {
  if (path.empty()) throw wpi::Error(wpi::ErrorKind::InvalidInput, "--input is required");
  std::ifstream in(path);
  if (!in) throw wpi::Error(wpi::ErrorKind::InvalidInput, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw wpi::Error(wpi::ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

/// Writes the artifact to --output, or to stdout when none is given.
void emit(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw wpi::Error(wpi::ErrorKind::InvalidInput, "cannot write " + c.output);
  out << text;
}

void emit_json(const Common& c, json body) {
  body["meta"] = c.meta();
  emit(c, body.dump(2) + "\n");
}

class Csv {
 public:
  explicit Csv(const Common& c, const std::vector<std::string>& columns) {
    os_ << c.csv_meta();
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }
  void comment(const std::string& s) { os_ << "# " << s << "\n"; }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
  }
  void row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    for (double x : cells) s.push_back(wpi::fmt17(x));
    row(s);
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string join_states(std::uint64_t mask, int n) {
  std::string s;
  for (int i : wpi::mask_states(mask, n)) s += (s.empty() ? "" : ";") + std::to_string(i);
  return s;
}

wpi::ConductanceOptions conductance_options(const Common& c, const std::string& mode, std::size_t samples) {
  wpi::ConductanceOptions o;
  if (mode == "exhaustive")
    o.mode = wpi::SetMode::Exhaustive;
  else if (mode == "sampled")
    o.mode = wpi::SetMode::SampledSets;
  else
    throw wpi::Error(wpi::ErrorKind::InvalidInput, "--mode must be exhaustive or sampled");
  o.samples = samples;
  o.seed = c.seed;
  o.parallelism = c.parallelism;
  return o;
}

/// Checks ||P^n f||^2 <= gamma(n) osc(f)^2 and throws the first witness.
void check_profile_against(const wpi::FiniteKernel& k, const wpi::Vector& f, const wpi::ConvergenceProfile& g,
                           const std::string& label, double slack, json& rows) {
  wpi::Observable o(f, k.mu());
  auto decay = wpi::pn_decay(k, f, g.n_max());
  double worst = 0.0;
  for (std::size_t n = 0; n <= g.n_max(); ++n) {
    const double cap = g[n] * o.osc_sq();
    if (cap > 0.0) worst = std::max(worst, decay[n] / cap);
    if (decay[n] > cap + slack)
      throw AssertionFailure("bound violated for " + label + " at n=" + std::to_string(n) + ": ||P^n f||^2 = " +
                             wpi::fmt17(decay[n]) + " > gamma(n) osc^2 = " + wpi::fmt17(cap));
  }
  rows.push_back({{"observable", label}, {"max_ratio", wpi::num_to_json(worst)}});
}

// ---------------------------------------------------------------------------------------------

struct RatesArgs {
  std::string beta, alpha;
  std::size_t n_max = 100;
  double a_bound = 1.0;
};

int run_rates_convert(const Common& c, const RatesArgs& a) {
  if (int(!a.beta.empty()) + int(!a.alpha.empty()) + int(!c.input.empty()) != 1)
    throw wpi::Error(wpi::ErrorKind::InvalidInput, "give exactly one of --beta, --alpha, --input");
  wpi::WpiCertificate cert;
  if (!a.beta.empty())
    cert = wpi::beta_certificate(wpi::rate_from_spec(a.beta), a.a_bound, "cli");
  else if (!a.alpha.empty()) {
    auto alpha = wpi::rate_from_spec(a.alpha);
    cert = wpi::alpha_certificate(alpha.with_cutoff(std::min(alpha.cutoff(), a.a_bound)), a.a_bound, "cli");
  } else {
    cert = wpi::certificate_from_json(read_json(c.input));
  }
  if (cert.param == wpi::Parametrization::Alpha) cert = wpi::alpha_to_beta(cert);
  auto g = wpi::gamma_from_beta(cert, a.n_max);
  Csv csv(c, {"n", "gamma"});
  for (std::size_t n = 0; n <= g.n_max(); ++n) csv.row({double(n), g[n]});
  emit(c, csv.str());
  return kExitOk;
}

struct FiniteArgs {
  std::size_t n_max = 200;
  std::string mode = "exhaustive";
  std::size_t samples = 100000;
};

int run_finite_analyze(const Common& c, const FiniteArgs& a) {
  json in = read_json(c.input);
  wpi::FiniteKernel P = wpi::kernel_from_json(in.contains("kernel") ? in.at("kernel") : in);
  const wpi::FiniteKernel T = wpi::adjoint_product(P);
  json out;
  out["states"] = P.size();
  out["reversibility_defect"] = wpi::num_to_json(P.reversibility_defect());
  out["reversible"] = P.is_reversible();
  auto rp = wpi::rupi_check(P), rt = wpi::rupi_check(T);
  out["irreducible"] = rp.irreducible;
  out["adjoint_product_irreducible"] = rt.irreducible;
  if (P.is_reversible() && !P.has_zero_mass()) out["spectral_gap"] = wpi::num_to_json(wpi::spectral_gap(P));
  if (!rt.irreducible)
    throw wpi::Error(wpi::ErrorKind::ZeroConductance, "P*P is reducible (state " + std::to_string(rt.from) +
                                                          " cannot reach " + std::to_string(rt.to) + "): no WPI with osc^2 exists");
  auto prof = wpi::weak_conductance(T, conductance_options(c, a.mode, a.samples));
  auto alpha = wpi::cheeger_wpi(prof, 1.0, "P*P");
  auto beta = wpi::alpha_to_beta(alpha);
  auto g = wpi::gamma_from_beta(beta, a.n_max);
  out["alpha_certificate"] = wpi::to_json(alpha);
  out["beta_certificate"] = wpi::to_json(beta);
  out["gamma"] = wpi::to_json(g);
  json checks = json::array();
  if (prof.exact) {
    const double slack = c.tol_or(1e-9);
    for (int i = 0; i < P.size(); ++i)
      check_profile_against(P, wpi::indicator({i}, P).values, g, "1_{" + std::to_string(i) + "}", slack, checks);
    if (in.contains("observable"))
      check_profile_against(P, wpi::eigen_from_json(in.at("observable")), g, "observable", slack, checks);
  }
  out["checks"] = checks;
  out["certified"] = prof.exact;
  emit_json(c, out);
  return kExitOk;
}

struct ConductanceArgs {
  std::string mode = "exhaustive";
  std::size_t samples = 100000;
  bool adjoint_product = false;
};

int run_conductance(const Common& c, const ConductanceArgs& a) {
  json in = read_json(c.input);
  wpi::FiniteKernel P = wpi::kernel_from_json(in.contains("kernel") ? in.at("kernel") : in);
  if (a.adjoint_product) P = wpi::adjoint_product(P);
  auto prof = wpi::weak_conductance(P, conductance_options(c, a.mode, a.samples));
  Csv csv(c, {"u_end", "kappa", "witness"});
  csv.comment(std::string("kernel=") + (a.adjoint_product ? "P*P" : "P") + " exact=" + (prof.exact ? "true" : "false"));
  for (const auto& bp : prof.breakpoints()) csv.row({wpi::fmt17(bp.u_end), wpi::fmt17(bp.ratio), join_states(bp.witness, P.size())});
  if (prof.exact && !prof.front.empty() && prof.front.front().flow > 0.0) {
    auto checks = wpi::cheeger_converse(wpi::cheeger_wpi(prof), prof, wpi::log_grid(1e-6, 0.25, 50));
    for (const auto& k : checks)
      if (!k.ok)
        throw AssertionFailure("Cheeger converse fails at r=" + wpi::fmt17(k.r) + ": 1/alpha=" + wpi::fmt17(k.inv_alpha) +
                               " middle=" + wpi::fmt17(k.middle) + " 2kappa(2r)=" + wpi::fmt17(k.upper));
  }
  emit(c, csv.str());
  return kExitOk;
}

struct ImhArgs {
  double a = 0.5, b = 0.25;
  int trunc = 200, m_max = 20;
};

int run_imh(const Common& c, const ImhArgs& a) {
  wpi::ImhGeometric chain{a.a, a.b, a.trunc};
  chain.validate();
  auto v = wpi::imh_spectrum_validate(chain, a.m_max, c.tol_or(1e-8));
  Csv csv(c, {"m", "eigenvalue", "lambda_m", "residual"});
  for (std::size_t i = 0; i < v.eigen.size(); ++i) csv.row({double(i + 1), v.eigen[i], v.formula[i], v.residual[i]});
  const double tol = c.tol_or(1e-8);
  for (std::size_t i = 0; i < v.residual.size(); ++i)
    if (v.residual[i] > tol)
      throw AssertionFailure("eigenvalue " + std::to_string(i + 1) + " differs from Lambda_m by " + wpi::fmt17(v.residual[i]));
  emit(c, csv.str());
  return kExitOk;
}

struct AbcArgs {
  double a = 0.5, q = 0.5;
  int N = 1, max_x = 14;
  double s_min = 10.0, s_max = 1000.0;
  std::size_t points = 200;
};

int run_abc(const Common& c, const AbcArgs& a) {
  wpi::AbcChain chain{a.a, a.q, a.N, a.max_x};
  chain.validate();
  wpi::ConductanceOptions opt;
  opt.parallelism = c.parallelism;
  auto lines = wpi::indicator_lines(wpi::weak_conductance(wpi::abc_build(chain), opt));
  auto grid = wpi::log_grid(a.s_min, a.s_max, a.points);
  auto beta = wpi::beta_star_lower(lines, grid);
  std::vector<double> ys;
  for (double s : grid) ys.push_back(beta(s));
  Csv csv(c, {"s", "beta_lower"});
  csv.comment("loglog_slope=" + wpi::fmt17(wpi::loglog_slope(grid, ys)) + " floor_exponent=" +
              wpi::fmt17(wpi::abc_floor_exponent(chain)));
  for (std::size_t i = 0; i < grid.size(); ++i) csv.row({grid[i], ys[i]});
  emit(c, csv.str());
  return kExitOk;
}

struct RwmArgs {
  std::string regime = "gaussian", potential = "gaussian";
  double varsigma = 1.0, sigma0 = 1.0;
  int d = 2;
  std::size_t mc_samples = 0;
};

int run_rwm_bounds(const Common& c, const RwmArgs& a) {
  wpi::RwmSpec spec = c.input.empty() ? wpi::rwm_preset(wpi::rwm_potential_from_string(a.potential), a.d, a.varsigma, a.sigma0)
                                      : wpi::rwm_spec_from_json(read_json(c.input));
  wpi::RwmRegime regime;
  if (a.regime == "gaussian")
    regime = wpi::RwmRegime::Gaussian;
  else if (a.regime == "convex")
    regime = wpi::RwmRegime::GeneralConvex;
  else
    throw wpi::Error(wpi::ErrorKind::InvalidInput, "--regime must be gaussian or convex");
  if (regime == wpi::RwmRegime::Gaussian && spec.potential != wpi::RwmPotential::Gaussian)
    throw wpi::Error(wpi::ErrorKind::RegimeViolation, "the gaussian regime needs the gaussian potential");
  auto b = wpi::rwm_gap_bounds(spec, regime);
  json out;
  out["spec"] = wpi::to_json(spec);
  out["regime"] = a.regime;
  out["conductance_lower"] = wpi::num_to_json(b.conductance_lower);
  out["conductance_lower_times_sqrt_d"] = wpi::num_to_json(b.conductance_lower * std::sqrt(double(spec.d)));
  out["gap_lower"] = wpi::num_to_json(b.gap_lower);
  out["gap_upper"] = wpi::num_to_json(b.gap_upper);
  if (regime == wpi::RwmRegime::Gaussian) out["limit_constant"] = wpi::num_to_json(wpi::rwm_gaussian_limit_constant(spec.varsigma));
  if (a.mc_samples > 0) {
    auto e = wpi::rwm_conductance_mc(spec, {wpi::RwmSet{wpi::RwmSetKind::HalfSpace}}, a.mc_samples, c.seed, c.parallelism).front();
    const double ceiling = wpi::rwm_halfspace_kappa_ceiling(spec);
    out["halfspace"] = {{"kappa", wpi::to_json(e.kappa)},
                        {"flow", wpi::to_json(e.flow)},
                        {"acceptance", wpi::to_json(e.acceptance)},
                        {"kappa_ceiling", wpi::num_to_json(ceiling)}};
    if (e.kappa.value > ceiling + 3.0 * e.kappa.stderr_)
      throw AssertionFailure("half-space kappa " + wpi::fmt17(e.kappa.value) + " +- " + wpi::fmt17(e.kappa.stderr_) +
                             " exceeds 4 varsigma / sqrt(d) = " + wpi::fmt17(ceiling));
  }
  emit_json(c, out);
  return kExitOk;
}

struct DriftArgs {
  bool builtin = false;
  int states = 400;
  double alpha = 0.6;
  std::size_t n_max = 500;
};

int run_drift_wpi(const Common& c, const DriftArgs& a) {
  wpi::FiniteKernel k;
  std::optional<wpi::DriftCondition> dc;
  if (a.builtin) {
    auto ch = wpi::drift_birth_death(a.states, a.alpha);
    k = ch.kernel;
    dc = ch.drift;
  } else {
    json in = read_json(c.input);
    if (!in.contains("kernel") || !in.contains("drift"))
      throw wpi::Error(wpi::ErrorKind::InvalidInput, "drift input needs 'kernel' and 'drift' objects");
    k = wpi::kernel_from_json(in.at("kernel"));
    dc = wpi::drift_from_json(in.at("drift"));
  }
  json out;
  out["drift"] = wpi::to_json(*dc);
  if (dc->form == wpi::DriftForm::Geometric) {
    auto rep = wpi::verify_drift(k, *dc);
    auto lpi = wpi::local_pi_constant_exact(k, dc->C);
    out["min_slack"] = wpi::num_to_json(rep.min_slack);
    out["local_pi_constant"] = wpi::num_to_json(lpi.K);
    out["spectral_gap_lower"] = wpi::num_to_json(wpi::spi_from_drift(k, *dc, lpi));
    if (k.is_reversible()) out["spectral_gap"] = wpi::num_to_json(wpi::spectral_gap(k));
    emit_json(c, out);
    return kExitOk;
  }
  auto r = wpi::wpi_from_drift(k, *dc);
  out["min_slack"] = wpi::num_to_json(r.drift.min_slack);
  out["worst_state"] = r.drift.worst_state;
  out["mu_phi_V"] = wpi::num_to_json(r.drift.mu_phi_V);
  out["b_mu_C"] = wpi::num_to_json(r.drift.b_mu_C);
  out["checked_kernel"] = r.drift.kernel;
  out["local_pi_constant"] = wpi::num_to_json(r.local.K);
  out["mu_C"] = wpi::num_to_json(r.mu_C);
  out["beta_certificate"] = wpi::to_json(r.cert);
  auto g = wpi::gamma_from_beta(r.cert, a.n_max);
  out["gamma"] = wpi::to_json(g);
  json checks = json::array();
  const int n = k.size();
  for (int cut : {n / 8, n / 4, n / 2}) {
    wpi::Vector f = wpi::Vector::Zero(n);
    for (int i = cut; i < n; ++i) f(i) = 1.0;
    check_profile_against(k, f, g, "1_{x>=" + std::to_string(cut) + "}", c.tol_or(1e-9), checks);
  }
  out["checks"] = checks;
  emit_json(c, out);
  return kExitOk;
}

struct CltArgs {
  std::optional<double> power;
  std::size_t n_max = 2000;
};

int run_clt(const Common& c, const CltArgs& a) {
  wpi::CltReport rep;
  if (a.power) {
    wpi::ConvergenceProfile g;
    for (std::size_t n = 0; n <= a.n_max; ++n) g.gamma.push_back(n == 0 ? 1.0 : std::pow(double(n), -*a.power));
    rep = wpi::clt_check(g);
  } else {
    json in = read_json(c.input);
    if (in.contains("gamma")) {
      rep = wpi::clt_check(wpi::profile_from_json(in));
    } else {
      wpi::FiniteKernel k = wpi::kernel_from_json(in.contains("kernel") ? in.at("kernel") : in);
      if (!in.contains("observable")) throw wpi::Error(wpi::ErrorKind::InvalidInput, "a kernel input needs an 'observable'");
      rep = wpi::clt_check(k, wpi::eigen_from_json(in.at("observable")), a.n_max);
    }
  }
  const char* shape = rep.shape == wpi::DecayShape::Geometric ? "geometric"
                      : rep.shape == wpi::DecayShape::Polynomial ? "polynomial" : "vanished";
  json out = {{"verdict", wpi::to_string(rep.verdict)},
              {"shape", shape},
              {"slope_a", wpi::num_to_json(rep.slope_a)},
              {"exact", rep.exact},
              {"partial_sum", wpi::num_to_json(rep.partial_sums.empty() ? 0.0 : rep.partial_sums.back())}};
  emit_json(c, out);
  return kExitOk;
}

int run_validate_all(const Common& c) {
  wpi::AcceptanceOptions opt{c.seed, c.parallelism};
  Csv csv(c, {"id", "name", "pass", "detail"});
  int failed = 0;
  for (std::size_t i = 0; i < wpi::acceptance_criteria().size(); ++i) {
    auto r = wpi::run_criterion(i, opt);
    std::cerr << wpi::format_result(r) << std::endl;
    std::string detail = r.detail;
    for (char& ch : detail)
      if (ch == '"') ch = '\'';
    // timings go to stderr only, so the artifact is reproducible
    csv.row({std::to_string(r.id), r.name, r.pass ? "true" : "false", "\"" + detail + "\""});
    failed += !r.pass;
  }
  emit(c, csv.str());
  if (failed) throw AssertionFailure(std::to_string(failed) + " acceptance criteria failed");
  return kExitOk;
}

int exit_code_for(wpi::ErrorKind k) {
  switch (k) {
    case wpi::ErrorKind::DriftViolated:
    case wpi::ErrorKind::BracketViolation: return kExitAssertion;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak Poincare inequality toolkit"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", common.input, "input JSON file");
    sub->add_option("--output", common.output, "output file (stdout when omitted)");
    sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
    sub->add_option("--parallelism", common.parallelism, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--tol", common.tol, "tolerance override");
    return sub;
  };

  RatesArgs rates;
  auto* rc = add_common(app.add_subcommand("rates-convert", "convergence profile gamma(n) from a WPI rate"));
  rc->add_option("--beta", rates.beta, "beta rate, e.g. powerlaw:1,1");
  rc->add_option("--alpha", rates.alpha, "alpha rate, e.g. const:16");
  rc->add_option("--n-max", rates.n_max)->capture_default_str();
  rc->add_option("--a-bound", rates.a_bound)->capture_default_str();

  FiniteArgs fin;
  auto* fa = add_common(app.add_subcommand("finite-analyze", "certified WPI and convergence check for a finite chain"));
  fa->add_option("--n-max", fin.n_max)->capture_default_str();
  fa->add_option("--mode", fin.mode, "exhaustive or sampled")->capture_default_str();
  fa->add_option("--samples", fin.samples)->capture_default_str();

  ConductanceArgs cond;
  auto* co = add_common(app.add_subcommand("conductance", "weak conductance profile of a finite chain"));
  co->add_option("--mode", cond.mode, "exhaustive or sampled")->capture_default_str();
  co->add_option("--samples", cond.samples)->capture_default_str();
  co->add_flag("--adjoint-product", cond.adjoint_product, "analyse P*P instead of P");

  ImhArgs imh;
  auto* im = add_common(app.add_subcommand("imh", "independence sampler spectrum check"));
  im->add_option("--a", imh.a)->capture_default_str();
  im->add_option("--b", imh.b)->capture_default_str();
  im->add_option("--trunc", imh.trunc)->capture_default_str();
  im->add_option("--m-max", imh.m_max)->capture_default_str();

  AbcArgs abc;
  auto* ab = add_common(app.add_subcommand("abc", "lower bound on beta* for the ABC chain"));
  ab->add_option("--a", abc.a)->capture_default_str();
  ab->add_option("--q", abc.q)->capture_default_str();
  ab->add_option("--N", abc.N)->capture_default_str();
  ab->add_option("--max-x", abc.max_x)->capture_default_str();
  ab->add_option("--s-min", abc.s_min)->capture_default_str();
  ab->add_option("--s-max", abc.s_max)->capture_default_str();
  ab->add_option("--points", abc.points)->capture_default_str();

  RwmArgs rwm;
  auto* rw = add_common(app.add_subcommand("rwm-bounds", "random walk Metropolis conductance and gap bounds"));
  rw->add_option("--regime", rwm.regime, "gaussian or convex")->capture_default_str();
  rw->add_option("--potential", rwm.potential, "gaussian or logistic-demo")->capture_default_str();
  rw->add_option("--varsigma", rwm.varsigma)->capture_default_str();
  rw->add_option("--sigma0", rwm.sigma0)->capture_default_str();
  rw->add_option("--d", rwm.d)->capture_default_str();
  rw->add_option("--mc-samples", rwm.mc_samples, "half-space Monte Carlo check (0 = off)")->capture_default_str();

  DriftArgs drift;
  auto* dw = add_common(app.add_subcommand("drift-wpi", "WPI from a drift condition on a finite chain"));
  dw->add_flag("--builtin", drift.builtin, "use the lazy birth-death example chain");
  dw->add_option("--states", drift.states)->capture_default_str();
  dw->add_option("--alpha", drift.alpha)->capture_default_str();
  dw->add_option("--n-max", drift.n_max)->capture_default_str();

  CltArgs clt;
  auto* cl = add_common(app.add_subcommand("clt", "central limit theorem criterion"));
  cl->add_option("--power", clt.power, "use gamma(n) = n^-a");
  cl->add_option("--n-max", clt.n_max)->capture_default_str();

  auto* va = add_common(app.add_subcommand("validate-all", "run every acceptance criterion"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    common.command = sub->get_name();
    if (sub == rc) return run_rates_convert(common, rates);
    if (sub == fa) return run_finite_analyze(common, fin);
    if (sub == co) return run_conductance(common, cond);
    if (sub == im) return run_imh(common, imh);
    if (sub == ab) return run_abc(common, abc);
    if (sub == rw) return run_rwm_bounds(common, rwm);
    if (sub == dw) return run_drift_wpi(common, drift);
    if (sub == cl) return run_clt(common, clt);
    if (sub == va) return run_validate_all(common);
  } catch (const AssertionFailure& e) {
    std::cerr << "assertion failed: " << e.what() << std::endl;
    return kExitAssertion;
  } catch (const wpi::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitInput;
  }
  return kExitInput;
}
