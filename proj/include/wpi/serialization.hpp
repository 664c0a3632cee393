#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wpi/bounds.hpp"
#include "wpi/conductance.hpp"
#include "wpi/finite_kernel.hpp"
#include "wpi/monotone_rate.hpp"
#include "wpi/rate_calculus.hpp"
#include "wpi/rwm.hpp"

namespace wpi {

using json = nlohmann::json;

// ---------------------------------------------------------------------------------------------
// Numbers: JSON has no infinities, so they travel as the strings "inf" and "-inf".

inline json num_to_json(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double num_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  fail(ErrorKind::InvalidInput, "expected a number or \"inf\", got " + j.dump());
}

inline json vec_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num_to_json(x));
  return a;
}

inline std::vector<double> vec_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorKind::InvalidInput, "expected an array, got " + j.dump());
  std::vector<double> v;
  for (const auto& x : j) v.push_back(num_from_json(x));
  return v;
}

inline json vec_to_json(const Vector& v) { return vec_to_json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector eigen_from_json(const json& j) {
  auto v = vec_from_json(j);
  return Eigen::Map<Vector>(v.data(), Eigen::Index(v.size()));
}

inline double field(const json& j, const char* key) {
  if (!j.contains(key)) fail(ErrorKind::InvalidInput, std::string("missing field '") + key + "'");
  return num_from_json(j.at(key));
}

inline double field_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? num_from_json(j.at(key)) : fallback;
}

// ---------------------------------------------------------------------------------------------
// Rates and certificates

inline json to_json(const MonotoneRate& r) {
  json j = std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PowerLaw>)
          return {{"form", "power_law"}, {"c", num_to_json(f.c)}, {"p", num_to_json(f.p)}};
        else if constexpr (std::is_same_v<F, ExpPower>)
          return {{"form", "exp_power"}, {"c", num_to_json(f.c)}, {"lambda", num_to_json(f.lambda)}, {"theta", num_to_json(f.theta)}};
        else if constexpr (std::is_same_v<F, LogPower>)
          return {{"form", "log_power"}, {"c", num_to_json(f.c)}, {"lambda", num_to_json(f.lambda)}, {"theta", num_to_json(f.theta)}};
        else if constexpr (std::is_same_v<F, Constant>)
          return {{"form", "constant"}, {"c", num_to_json(f.c)}};
        else
          return {{"form", "tabulated"},
                  {"grid", vec_to_json(f.grid)},
                  {"values", vec_to_json(f.values)},
                  {"mode", f.mode == TabMode::Step ? "step" : "linear"}};
      },
      r.form());
  j["floor"] = num_to_json(r.floor());
  j["cap"] = num_to_json(r.cap());
  j["cutoff"] = num_to_json(r.cutoff());
  return j;
}

inline MonotoneRate rate_from_json(const json& j) {
  if (!j.is_object() || !j.contains("form")) fail(ErrorKind::InvalidInput, "rate needs a 'form' field");
  const std::string form = j.at("form").get<std::string>();
  MonotoneRate::Form f;
  if (form == "power_law")
    f = PowerLaw{field(j, "c"), field(j, "p")};
  else if (form == "exp_power")
    f = ExpPower{field(j, "c"), field(j, "lambda"), field(j, "theta")};
  else if (form == "log_power")
    f = LogPower{field(j, "c"), field(j, "lambda"), field(j, "theta")};
  else if (form == "constant")
    f = Constant{field(j, "c")};
  else if (form == "tabulated") {
    std::string mode = j.value("mode", "step");
    if (mode != "step" && mode != "linear") fail(ErrorKind::InvalidInput, "tabulated mode must be step or linear");
    f = Tabulated{vec_from_json(j.at("grid")), vec_from_json(j.at("values")), mode == "step" ? TabMode::Step : TabMode::Linear};
  } else {
    fail(ErrorKind::InvalidInput, "unknown rate form '" + form + "'");
  }
  return MonotoneRate(std::move(f), field_or(j, "floor", 0.0), field_or(j, "cap", kInf), field_or(j, "cutoff", kInf));
}

/// Compact command-line form: "powerlaw:c,p", "exp:c,lambda,theta", "const:c".
inline MonotoneRate rate_from_spec(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) fail(ErrorKind::InvalidInput, "rate spec needs the form name:args");
  std::string name = spec.substr(0, colon);
  std::vector<double> args;
  std::stringstream ss(spec.substr(colon + 1));
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      args.push_back(tok == "inf" ? kInf : std::stod(tok, &used));
      if (tok != "inf" && used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidInput, "bad number '" + tok + "' in rate spec");
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) fail(ErrorKind::InvalidInput, name + " takes " + std::to_string(n) + " arguments");
  };
  if (name == "powerlaw") return need(2), MonotoneRate::power_law(args[0], args[1]);
  if (name == "exp") return need(3), MonotoneRate::exp_power(args[0], args[1], args[2]);
  if (name == "const") return need(1), MonotoneRate::constant(args[0]);
  fail(ErrorKind::InvalidInput, "unknown rate form '" + name + "'");
}

inline const char* sieve_name(Sieve s) {
  switch (s) {
    case Sieve::OscSq: return "osc2";
    case Sieve::PNorm: return "pnorm";
    case Sieve::Custom: return "custom";
  }
  return "?";
}

inline json to_json(const WpiCertificate& c) {
  json j = {{"param", c.param == Parametrization::Alpha ? "alpha" : "beta"},
            {"sieve", sieve_name(c.sieve)},
            {"rate", to_json(c.rate)},
            {"a_bound", num_to_json(c.a_bound)},
            {"kernel", c.kernel},
            {"origin", c.origin}};
  if (c.sieve == Sieve::PNorm) j["sieve_p"] = num_to_json(c.sieve_p);
  if (c.sieve == Sieve::Custom) j["sieve_name"] = c.sieve_name;
  return j;
}

inline WpiCertificate certificate_from_json(const json& j) {
  WpiCertificate c;
  const std::string param = j.value("param", "beta");
  if (param != "alpha" && param != "beta") fail(ErrorKind::InvalidInput, "param must be alpha or beta");
  c.param = param == "alpha" ? Parametrization::Alpha : Parametrization::Beta;
  const std::string sieve = j.value("sieve", "osc2");
  if (sieve == "osc2")
    c.sieve = Sieve::OscSq;
  else if (sieve == "pnorm")
    c.sieve = Sieve::PNorm, c.sieve_p = field(j, "sieve_p");
  else if (sieve == "custom")
    c.sieve = Sieve::Custom, c.sieve_name = j.value("sieve_name", "");
  else
    fail(ErrorKind::InvalidInput, "unknown sieve '" + sieve + "'");
  c.rate = rate_from_json(j.at("rate"));
  c.a_bound = field_or(j, "a_bound", 1.0);
  c.kernel = j.value("kernel", "P");
  c.origin = j.value("origin", "");
  c.validate();
  return c;
}

inline json to_json(const ConvergenceProfile& g) { return {{"gamma", vec_to_json(g.gamma)}, {"origin", g.origin}}; }

inline ConvergenceProfile profile_from_json(const json& j) {
  ConvergenceProfile g{vec_from_json(j.at("gamma")), j.value("origin", "")};
  detail::check_profile(g);
  return g;
}

// ---------------------------------------------------------------------------------------------
// Chains and estimates

inline json to_json(const FiniteKernel& k) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < k.P().rows(); ++i) rows.push_back(vec_to_json(Vector(k.P().row(i).transpose())));
  return {{"P", rows}, {"mu", vec_to_json(k.mu())}};
}

/// {"P": [[...], ...], "mu": [...]} with mu optional (solved for when absent).
inline FiniteKernel kernel_from_json(const json& j) {
  if (!j.contains("P") || !j.at("P").is_array()) fail(ErrorKind::InvalidInput, "kernel needs a 'P' matrix");
  const auto& rows = j.at("P");
  const Eigen::Index n = Eigen::Index(rows.size());
  Matrix P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto r = vec_from_json(rows.at(std::size_t(i)));
    if (Eigen::Index(r.size()) != n) fail(ErrorKind::InvalidInput, "P must be square");
    for (Eigen::Index c = 0; c < n; ++c) P(i, c) = r[std::size_t(c)];
  }
  if (j.contains("mu")) return FiniteKernel(std::move(P), eigen_from_json(j.at("mu")));
  return FiniteKernel(std::move(P));
}

inline json to_json(const ConductanceProfile& p) {
  json front = json::array();
  for (const auto& s : p.front) front.push_back({{"u", num_to_json(s.u)}, {"flow", num_to_json(s.flow)}, {"mask", s.mask}});
  return {{"exact", p.exact}, {"states", p.states}, {"front", front}};
}

inline ConductanceProfile conductance_from_json(const json& j) {
  ConductanceProfile p;
  p.exact = j.value("exact", true);
  p.states = j.value("states", 0);
  for (const auto& s : j.at("front")) p.front.push_back({field(s, "u"), field(s, "flow"), s.value("mask", std::uint64_t(0))});
  return p;
}

inline json to_json(const McEstimate& e) {
  return {{"value", num_to_json(e.value)}, {"stderr", num_to_json(e.stderr_)}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

inline json to_json(const RwmSpec& s) {
  return {{"d", s.d},         {"sigma0", num_to_json(s.sigma0)}, {"varsigma", num_to_json(s.varsigma)},
          {"m", num_to_json(s.m)}, {"L", num_to_json(s.L)}, {"potential", to_string(s.potential)},
          {"n_obs", s.n_obs}, {"data_seed", s.data_seed}};
}

/// Presets fill m and L from the potential unless they are given explicitly.
inline RwmSpec rwm_spec_from_json(const json& j) {
  RwmPotential pot = rwm_potential_from_string(j.value("potential", "gaussian"));
  RwmSpec s = rwm_preset(pot, j.value("d", 2), field_or(j, "varsigma", 1.0), field_or(j, "sigma0", 1.0),
                         j.value("n_obs", 4), j.value("data_seed", std::uint64_t(7)));
  if (j.contains("m")) s.m = field(j, "m");
  if (j.contains("L")) s.L = field(j, "L");
  s.validate();
  return s;
}

/// {"V": [...], "C": [...], "form": {"type": "geometric", "lambda", "b"}} or
/// {"type": "power", "c", "alpha", "b"} for phi(v) = c v^alpha.
inline DriftCondition drift_from_json(const json& j) {
  Vector V = eigen_from_json(j.at("V"));
  std::vector<int> C = j.at("C").get<std::vector<int>>();
  const json& f = j.at("form");
  const std::string type = f.value("type", "");
  if (type == "geometric") return DriftCondition::geometric(V, C, field(f, "lambda"), field(f, "b"));
  if (type == "power") return DriftCondition::power_law(V, C, field(f, "c"), field(f, "alpha"), field(f, "b"));
  fail(ErrorKind::InvalidInput, "drift form type must be geometric or power");
}

inline json to_json(const DriftCondition& d) {
  json form;
  if (d.form == DriftForm::Geometric)
    form = {{"type", "geometric"}, {"lambda", num_to_json(d.lambda)}, {"b", num_to_json(d.b)}};
  else if (d.power)
    form = {{"type", "power"}, {"c", num_to_json(d.power->first)}, {"alpha", num_to_json(d.power->second)}, {"b", num_to_json(d.b)}};
  else
    fail(ErrorKind::InvalidInput, "only geometric and power drift forms serialise");
  return {{"V", vec_to_json(d.V)}, {"C", d.C}, {"form", form}};
}

}  // namespace wpi
