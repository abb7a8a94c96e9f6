#include "pcc/cqed.hpp"

#include <cmath>
#include <numbers>

#include "pcc/errors.hpp"

namespace pcc {

namespace {
constexpr double kPi = std::numbers::pi;

double require_positive(double v, const char* name) {
  if (!(v > 0)) throw ConfigError(std::string(name) + " must be positive");
  return v;
}
}  // namespace

double CavityFigures::V_eff_nm3() const {
  const double unit = lambda_c / n;
  return V_eff_cubic_wavelengths * unit * unit * unit;
}

void CavityFigures::validate() const {
  require_positive(Q, "Q");
  require_positive(V_eff_cubic_wavelengths, "V_eff");
  require_positive(lambda_c, "lambda_c");
  require_positive(n, "n");
  if (!(eta > 0 && eta <= 1)) throw ConfigError("eta must lie in (0, 1]");
}

CavityFigures CavityFigures::from_json(const json& j) {
  CavityFigures c;
  try {
    c.Q = j.at("Q").get<double>();
    c.V_eff_cubic_wavelengths = j.at("V_eff").get<double>();
    c.lambda_c = j.at("lambda_c").get<double>();
    c.n = j.at("n").get<double>();
    c.eta = j.at("eta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad cavity figures: ") + e.what());
  }
  c.validate();
  return c;
}

void AtomSpec::validate() const {
  require_positive(lambda0, "lambda0");
  require_positive(gamma_perp, "gamma_perp");
}

AtomSpec AtomSpec::from_json(const json& j) {
  AtomSpec a;
  try {
    a.lambda0 = j.at("lambda0").get<double>();
    a.gamma_perp = j.at("gamma_perp").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad atom spec: ") + e.what());
  }
  a.validate();
  return a;
}

json StrongCouplingReport::to_json() const {
  json j;
  j["F_P"] = F_P;
  j["g_Hz"] = g;
  j["kappa_Hz"] = kappa;
  j["N0"] = N0;
  j["m0"] = m0;
  j["strong_coupling"] = strong_coupling;
  j["rate_convention"] = "plain frequency (Hz) for g, kappa, gamma_perp";
  return j;
}

double purcell_factor(double Q, double V_eff_cubic_wavelengths) {
  require_positive(Q, "Q");
  require_positive(V_eff_cubic_wavelengths, "V_eff");
  return 3.0 / (4.0 * kPi * kPi) * Q / V_eff_cubic_wavelengths;
}

double coupling_rate_g(const AtomSpec& atom, double V_eff_nm3, double eta) {
  atom.validate();
  require_positive(V_eff_nm3, "V_eff");
  if (eta < 0) throw ConfigError("eta must be non-negative");
  return eta * atom.gamma_perp *
         std::sqrt(kSpeedOfLightNmPerS * atom.lambda0 * atom.lambda0 /
                   (8.0 * kPi * atom.gamma_perp * V_eff_nm3));
}

double cavity_decay_kappa(double lambda0_nm, double Q) {
  require_positive(lambda0_nm, "lambda0");
  require_positive(Q, "Q");
  return kSpeedOfLightNmPerS / (2.0 * lambda0_nm * Q);
}

CriticalNumbers critical_numbers(double g, double kappa, double gamma_perp) {
  require_positive(g, "g");
  if (kappa < 0 || gamma_perp < 0) throw ConfigError("rates must be non-negative");
  return {2.0 * kappa * gamma_perp / (g * g), gamma_perp * gamma_perp / (2.0 * g * g)};
}

StrongCouplingReport assess(const CavityFigures& cavity, const AtomSpec& atom) {
  cavity.validate();
  atom.validate();
  StrongCouplingReport report;
  report.F_P = purcell_factor(cavity.Q, cavity.V_eff_cubic_wavelengths);
  // The mode volume scales with the cavity design; express it at the atomic line.
  const double unit = atom.lambda0 / cavity.n;
  const double v_nm3 = cavity.V_eff_cubic_wavelengths * unit * unit * unit;
  report.g = coupling_rate_g(atom, v_nm3, cavity.eta);
  report.kappa = cavity_decay_kappa(atom.lambda0, cavity.Q);
  const auto crit = critical_numbers(report.g, report.kappa, atom.gamma_perp);
  report.N0 = crit.N0;
  report.m0 = crit.m0;
  report.strong_coupling = report.g > report.kappa && report.g > atom.gamma_perp;
  return report;
}

}  // namespace pcc
