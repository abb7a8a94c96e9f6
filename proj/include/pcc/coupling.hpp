#pragma once

#include <complex>
#include <string>
#include <vector>

#include "pcc/fields.hpp"
#include "pcc/io.hpp"
#include "pcc/taper.hpp"

namespace pcc {

enum class TaperOrientation { AlongX, AlongY };

struct CouplingConfig {
  double gap_nm = 650;              // taper height above the sampling plane
  double offset_axial_nm = 0;       // displacement along the taper axis
  double offset_transverse_nm = 0;  // displacement across the taper axis
  TaperOrientation orientation = TaperOrientation::AlongY;

  // Loaded-linewidth budget: added loading at the reference position (zero
  // offset, configured gap) and its split into useful and parasitic channels.
  double gamma0_nm = 0.041;
  double added_loading_nm = 0.006;
  double parasitic_fraction = 0.5;

  // Effective phase-matched interaction window (FWHM along the taper axis);
  // zero means an ideal uniform taper, which makes axial scans flat.
  double interaction_fwhm_nm = 900;

  // Cavity-field component the overlap is taken against.  "Ex" suits fields
  // whose dominant in-plane polarization is aligned with the taper
  // polarization; "Ez" pairs the evanescent vertical components, the dominant
  // channel for a TE-like slab mode probed from above.
  std::string component = "Ex";

  void validate() const;
  static CouplingConfig from_json(const json& j);
  json to_json() const;
};

struct CouplingResult {
  std::complex<double> kappa_wg{0, 0};  // field overlap amplitude, relative units
  double gamma_wg_nm = 0;
  double gamma_parasitic_nm = 0;
  double depth = 0;
  double loaded_linewidth_nm = 0;

  json to_json() const;
};

struct DepthMap {
  std::vector<double> offsets_nm;
  std::vector<double> depths;
  double fwhm_um = 0;  // 0 when the half-maximum crossings are not bracketed

  json to_json() const;
};

// Phase-matched overlap between the cavity field on a plane (dims[2] == 1,
// scanned component per config) and the fundamental taper mode, with evanescent continuation
// across the gap.  The returned amplitude is normalized to the plane field's
// L2 norm; absolute rate calibration happens via CouplingConfig.
std::complex<double> fourier_overlap(const FieldSnapshot& plane, const TaperMode& taper,
                                     const CouplingConfig& config);

// Dip depth of the standard single-mode waveguide-cavity lineshape.
double transmission_depth(double gamma_wg_nm, double gamma_rest_nm);

// Lorentzian transmission dip, gamma_tot = gamma0 + gamma_parasitic + gamma_wg.
std::vector<double> transmission_spectrum(double lambda_c_nm, double gamma0_nm,
                                          double gamma_wg_nm, double gamma_parasitic_nm,
                                          const std::vector<double>& wavelengths_nm);

// Monoexponential loading forward model gamma(dz) = gamma0 + beta exp(-alpha dz).
std::vector<double> loading_model(double gamma0_nm, double beta_load_nm, double alpha_load_per_nm,
                                  const std::vector<double>& gaps_nm);

// Split a measured (depth, total linewidth) pair into waveguide and parasitic
// rates, taking the under-coupled branch.
struct LoadingSplit {
  double gamma_wg_nm = 0;
  double gamma_parasitic_nm = 0;
};
LoadingSplit solve_loading_split(double depth, double gamma0_nm, double gamma_total_nm);

// Overlap, rate calibration against the zero-offset reference, and lineshape
// depth in one step at the configured position.
CouplingResult couple(const FieldSnapshot& plane, const TaperMode& taper,
                      const CouplingConfig& config);

// Depth versus displacement along scan_axis (0 = x, 1 = y), other offsets from
// the config; reports the envelope FWHM.
DepthMap depth_map(const FieldSnapshot& plane, const TaperMode& taper,
                   const CouplingConfig& config, int scan_axis,
                   const std::vector<double>& offsets_nm);

// Nearest-layer extraction of a z-plane from a 3D snapshot.
FieldSnapshot extract_plane(const FieldSnapshot& snapshot, double z_nm);

}  // namespace pcc
