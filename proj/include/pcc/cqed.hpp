#pragma once

#include "pcc/io.hpp"

namespace pcc {

// Speed of light in nm/s; all rates below are plain frequencies in Hz.
inline constexpr double kSpeedOfLightNmPerS = 2.99792458e17;

struct CavityFigures {
  double Q = 0;
  double V_eff_cubic_wavelengths = 0;  // in (lambda_c/n)^3 units
  double lambda_c = 0;                 // nm
  double n = 0;                        // refractive index used for the volume unit
  double eta = 0;

  double V_eff_nm3() const;
  void validate() const;

  static CavityFigures from_json(const json& j);
};

struct AtomSpec {
  double lambda0 = 852.0;    // transition wavelength (nm)
  double gamma_perp = 2.6e6; // transverse decay rate (Hz)

  void validate() const;
  static AtomSpec from_json(const json& j);
};

struct StrongCouplingReport {
  double F_P = 0;
  double g = 0;       // Hz
  double kappa = 0;   // Hz
  double N0 = 0;
  double m0 = 0;
  bool strong_coupling = false;

  json to_json() const;
};

// F_P = (3 / 4 pi^2) * Q / V_eff, V_eff in cubic wavelengths.
double purcell_factor(double Q, double V_eff_cubic_wavelengths);

// g = eta * gamma_perp * sqrt(c lambda0^2 / (8 pi gamma_perp V_eff)), V_eff in nm^3.
double coupling_rate_g(const AtomSpec& atom, double V_eff_nm3, double eta);

// kappa = omega / (4 pi Q) = c / (2 lambda0 Q).
double cavity_decay_kappa(double lambda0_nm, double Q);

struct CriticalNumbers {
  double N0 = 0;
  double m0 = 0;
};

// N0 = 2 kappa gamma_perp / g^2, m0 = gamma_perp^2 / (2 g^2).
CriticalNumbers critical_numbers(double g, double kappa, double gamma_perp);

// Full report; the cavity volume is re-expressed at the atomic wavelength.
StrongCouplingReport assess(const CavityFigures& cavity, const AtomSpec& atom);

}  // namespace pcc
