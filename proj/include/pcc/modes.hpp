#pragma once

#include <complex>
#include <string>
#include <vector>

#include "pcc/fields.hpp"
#include "pcc/geometry.hpp"

namespace pcc {

struct ResonantModeEstimate {
  double frequency = 0;   // normalized a/lambda (or 1/time-unit of the input dt)
  double Q = 0;
  std::complex<double> amplitude{0, 0};
  double residual = 0;    // relative fit residual of the full decomposition
  bool q_saturated = false;        // decay below the reporting cap
  bool degraded_confidence = false;  // ill-conditioned pencil / weak SV gap
};

struct FrequencyBand {
  double lo = 0;
  double hi = 0;
};

struct HarmonicInversionOptions {
  double sv_rel_threshold = 1e-10;
  int max_model_order = 32;
  double q_cap = 1e8;
};

// Decompose a real ringdown signal into damped sinusoids with the matrix
// pencil method, returning modes inside the band sorted by frequency.
// Q = pi f / alpha with alpha the field amplitude decay rate.
std::vector<ResonantModeEstimate> harmonic_inversion(const std::vector<double>& samples,
                                                     double dt, FrequencyBand band,
                                                     const HarmonicInversionOptions& opts = {});

std::vector<ResonantModeEstimate> harmonic_inversion(const ProbeRecord& record,
                                                     FrequencyBand band,
                                                     const HarmonicInversionOptions& opts = {});

struct ModeMetrics {
  double V_eff_nm3 = 0;
  double V_eff_cubic_wavelengths = 0;  // in (lambda_c/n)^3
  double eta = 0;
  std::array<int, 3> peak_location{0, 0, 0};

  json to_json() const;
};

// V_eff = integral(eps |E|^2) / max(eps |E|^2); fills everything but eta.
ModeMetrics effective_mode_volume(const FieldSnapshot& field, const PermittivityGrid& grid);

// eta = sqrt(max over air cells |E|^2 / max over all cells eps |E|^2).
double eta_factor(const FieldSnapshot& field, const PermittivityGrid& grid,
                  double air_eps_threshold = 1.0 + 1e-6);

// Q = lambda_c / gamma0.
double q_from_linewidth(double lambda_c_nm, double gamma0_nm);

struct SweepPoint {
  double rbar = 0;  // mean hole radius r/a for this run
  std::vector<ResonantModeEstimate> spectrum;
};

struct FundamentalTag {
  std::string tag = "A2_0";
  std::vector<double> frequencies;  // tagged frequency per sweep point
  bool monotone = false;
  bool ambiguous = false;
};

// Tag the lowest-frequency band-edge resonance at every sweep point; flags
// ambiguity when the family is not monotone in rbar.
FundamentalTag identify_fundamental(const std::vector<SweepPoint>& sweep,
                                    double amplitude_floor_rel = 0.01);

// CSV emission per the modes interface: frequency, Q, amplitude, residual.
CsvTable modes_to_csv(const std::vector<ResonantModeEstimate>& modes);

}  // namespace pcc
