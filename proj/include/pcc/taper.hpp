#pragma once

#include <complex>

#include "pcc/io.hpp"

namespace pcc {

struct FiberSpec {
  double diameter_um = 1.7;
  double n_core = 1.45;   // silica
  double n_clad = 1.0;    // air
  double wavelength_nm = 1600.0;

  void validate() const;
  static FiberSpec from_json(const json& j);
};

// Exact fundamental (HE11) guided mode of the step-index cylinder.  The field
// profile is the x-polarized real representation; a global phase carries no
// meaning.  Lengths in nm.
struct TaperMode {
  double n_eff = 0;
  double beta = 0;            // rad/nm
  double k0 = 0;              // rad/nm
  double core_radius = 0;     // nm
  double u = 0;               // core transverse parameter
  double w = 0;               // cladding decay parameter
  double decay_constant = 0;  // w / core_radius (1/nm)
  double n_core = 0;
  double n_clad = 0;
  double wavelength_nm = 0;
  double dispersion_residual = 0;  // normalized characteristic determinant at the root
  // Boundary coefficients (Ez core, Hz core, Ez clad, Hz clad), power-normalized.
  double cA = 0, cB = 0, cC = 0, cD = 0;

  struct Transverse {
    std::complex<double> Ex{0, 0};
    std::complex<double> Ey{0, 0};
  };
  Transverse field(double x_nm, double y_nm) const;

  // Radial profile pieces used by the coupling overlap and by tests:
  // e_r, e_phi, e_z, h_r, h_phi, h_z (real representations) at radius r.
  struct RadialFields {
    double er = 0, ephi = 0, ez = 0;
    double hr = 0, hphi = 0, hz = 0;
  };
  RadialFields radial(double r_nm) const;

  json to_json() const;
};

// Solves the exact hybrid-mode characteristic equation by bracketed root
// finding in n_eff and returns the power-normalized HE11 mode.
TaperMode solve_fundamental(const FiberSpec& spec);

// Power flux of the normalized mode integrated numerically; 1 by construction
// up to quadrature error.  Exposed for tests.
double mode_power_flux(const TaperMode& mode);

}  // namespace pcc
