#include "pcc/modes.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;

// Transfer magnitude of two cascaded length-D boxcar averages at frequency f
// (cycles per input sample).
double double_boxcar_gain(double f, int D) {
  if (D == 1) return 1.0;
  const double num = std::sin(kPi * f * D);
  const double den = D * std::sin(kPi * f);
  if (std::abs(den) < 1e-300) return 1.0;
  const double h = num / den;
  return h * h;
}

}  // namespace

std::vector<ResonantModeEstimate> harmonic_inversion(const std::vector<double>& samples,
                                                     double dt, FrequencyBand band,
                                                     const HarmonicInversionOptions& opts) {
  const std::size_t n = samples.size();
  if (n < 32) throw NumericError("harmonic inversion needs at least 32 samples");
  if (!(dt > 0)) throw ConfigError("sample interval must be positive");
  const double nyquist = 0.5 / dt;
  if (!(band.lo >= 0 && band.hi > band.lo)) throw ConfigError("invalid frequency band");
  if (band.hi >= nyquist)
    throw ConfigError("band extends to or beyond the Nyquist frequency");

  // Heterodyne to the band center, then low-pass and decimate so the pencil
  // works on a short complex signal.
  // The band edges must stay well inside the main lobe of the anti-alias
  // boxcar (first null at 1/D cycles per sample), so edge gain stays ~0.9.
  const double f0 = 0.5 * (band.lo + band.hi);
  const double bw = band.hi - band.lo;
  int D = std::max(1, static_cast<int>(std::floor(0.35 / (std::max(bw, 1e-12) * dt))));
  D = std::min<int>(D, static_cast<int>(n) / 64);
  D = std::max(D, 1);

  std::vector<Complex> mixed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = -2.0 * kPi * f0 * dt * static_cast<double>(i);
    mixed[i] = samples[i] * Complex(std::cos(phase), std::sin(phase));
  }
  std::vector<Complex> sig;
  if (D == 1) {
    sig = std::move(mixed);
  } else {
    std::vector<Complex> smooth(n);
    Complex acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += mixed[i];
      if (i >= static_cast<std::size_t>(D)) acc -= mixed[i - D];
      smooth[i] = acc / static_cast<double>(D);
    }
    acc = 0;
    sig.reserve(n / D);
    std::vector<Complex> smooth2(n);
    for (std::size_t i = 0; i < n; ++i) {
      acc += smooth[i];
      if (i >= static_cast<std::size_t>(D)) acc -= smooth[i - D];
      smooth2[i] = acc / static_cast<double>(D);
    }
    for (std::size_t i = 2 * (D - 1); i < n; i += D) sig.push_back(smooth2[i]);
  }
  const int nd = static_cast<int>(sig.size());
  const double dtd = dt * D;
  const int L = std::clamp(nd / 3, 8, 96);
  if (nd - L < L + 1) throw NumericError("signal too short for the pencil window");

  Eigen::MatrixXcd Y(nd - L, L + 1);
  for (int r = 0; r < nd - L; ++r)
    for (int c = 0; c <= L; ++c) Y(r, c) = sig[r + c];

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0) throw NumericError("zero signal: nothing to invert");

  // Model order: singular values above the relative floor, truncated at the
  // largest gap.  A weak gap marks degraded confidence.
  int candidates = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > opts.sv_rel_threshold * sv[0]) ++candidates;
  candidates = std::min(candidates, std::min<int>(opts.max_model_order, L - 1));
  if (candidates < 1) throw NumericError("no signal components above threshold");
  int order = candidates;
  double best_ratio = 1.0;
  for (int i = 0; i + 1 < candidates; ++i) {
    const double ratio = sv[i] / std::max(sv[i + 1], 1e-300);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      order = i + 1;
    }
  }
  bool degraded = best_ratio < 1e3;
  if (degraded) order = candidates;

  const Eigen::MatrixXcd V = svd.matrixV().leftCols(order);
  const Eigen::MatrixXcd V1 = V.topRows(L);
  const Eigen::MatrixXcd V2 = V.bottomRows(L);
  const Eigen::MatrixXcd pencil =
      (V1.adjoint() * V1).ldlt().solve(V1.adjoint() * V2);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(pencil);
  if (eig.info() != Eigen::Success) throw NumericError("pencil eigensolve failed");
  // The right singular vectors evolve with the conjugate pole, so undo that.
  const Eigen::VectorXcd z = eig.eigenvalues().conjugate();

  // Amplitudes of every pencil component by least squares on the signal.
  Eigen::MatrixXcd basis(nd, order);
  for (int c = 0; c < order; ++c) {
    Complex p = 1.0;
    for (int r = 0; r < nd; ++r) {
      basis(r, c) = p;
      p *= z[c];
      if (!std::isfinite(std::abs(p))) p = 0;
    }
  }
  Eigen::VectorXcd rhs(nd);
  for (int r = 0; r < nd; ++r) rhs[r] = sig[r];
  const Eigen::VectorXcd amps = basis.colPivHouseholderQr().solve(rhs);
  const double signal_norm = rhs.norm();
  const double residual = (basis * amps - rhs).norm() / std::max(signal_norm, 1e-300);

  std::vector<ResonantModeEstimate> modes;
  for (int c = 0; c < order; ++c) {
    const double mag = std::abs(z[c]);
    if (mag <= 0) continue;
    const double f_off = std::arg(z[c]) / (2.0 * kPi * dtd);
    const double f = f0 + f_off;
    if (f < band.lo || f > band.hi) continue;
    double alpha = -std::log(mag) / dtd;
    ResonantModeEstimate mode;
    mode.frequency = f;
    if (alpha <= kPi * f / opts.q_cap) {
      mode.Q = opts.q_cap;
      mode.q_saturated = true;
    } else {
      mode.Q = kPi * f / alpha;
    }
    // Undo the filter attenuation; components this deep in the stopband are
    // either aliases or unmeasurable, so drop them instead of amplifying.
    const double gain = double_boxcar_gain((f - f0) * dt, D);
    if (gain < 1e-3) continue;
    mode.amplitude = amps[c] / gain;
    mode.residual = residual;
    mode.degraded_confidence = degraded;
    modes.push_back(mode);
  }
  std::sort(modes.begin(), modes.end(),
            [](const auto& a, const auto& b) { return a.frequency < b.frequency; });
  return modes;
}

std::vector<ResonantModeEstimate> harmonic_inversion(const ProbeRecord& record,
                                                     FrequencyBand band,
                                                     const HarmonicInversionOptions& opts) {
  return harmonic_inversion(record.samples, record.dt, band, opts);
}

json ModeMetrics::to_json() const {
  json j;
  j["V_eff_nm3"] = V_eff_nm3;
  j["V_eff_cubic_wavelengths"] = V_eff_cubic_wavelengths;
  j["eta"] = eta;
  j["peak_location"] = peak_location;
  return j;
}

namespace {

// eps |E|^2 over cells; throws if the snapshot is not an electric field on
// this grid.
std::vector<double> electric_energy_density(const FieldSnapshot& field,
                                            const PermittivityGrid& grid) {
  if (field.dims != grid.dims) throw ConfigError("snapshot and grid dims disagree");
  const std::vector<std::string> names = {"Ex", "Ey", "Ez"};
  bool any = false;
  std::vector<double> u(grid.cell_count(), 0.0);
  for (const auto& name : names) {
    const auto it = field.components.find(name);
    if (it == field.components.end()) continue;
    any = true;
    const auto& comp = it->second;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += std::norm(comp[i]);
  }
  if (!any) throw ConfigError("snapshot carries no electric field components");
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= grid.values[i];
  return u;
}

}  // namespace

ModeMetrics effective_mode_volume(const FieldSnapshot& field, const PermittivityGrid& grid) {
  const auto u = electric_energy_density(field, grid);
  double total = 0, peak = 0;
  std::size_t peak_idx = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    total += u[i];
    if (u[i] > peak) {
      peak = u[i];
      peak_idx = i;
    }
  }
  if (peak <= 0) throw NumericError("identically zero field: mode volume undefined");
  ModeMetrics metrics;
  const double cell_volume = grid.spacing * grid.spacing * grid.spacing;
  metrics.V_eff_nm3 = total * cell_volume / peak;
  const double lambda_c = field.wavelength_nm();
  const double unit = lambda_c / grid.n_slab;
  metrics.V_eff_cubic_wavelengths = metrics.V_eff_nm3 / (unit * unit * unit);
  const int nx = grid.dims[0], ny = grid.dims[1];
  metrics.peak_location = {static_cast<int>(peak_idx % nx),
                           static_cast<int>((peak_idx / nx) % ny),
                           static_cast<int>(peak_idx / (static_cast<std::size_t>(nx) * ny))};
  return metrics;
}

double eta_factor(const FieldSnapshot& field, const PermittivityGrid& grid,
                  double air_eps_threshold) {
  if (field.dims != grid.dims) throw ConfigError("snapshot and grid dims disagree");
  const std::vector<std::string> names = {"Ex", "Ey", "Ez"};
  std::vector<double> e2(grid.cell_count(), 0.0);
  bool any = false;
  for (const auto& name : names) {
    const auto it = field.components.find(name);
    if (it == field.components.end()) continue;
    any = true;
    for (std::size_t i = 0; i < e2.size(); ++i) e2[i] += std::norm(it->second[i]);
  }
  if (!any) throw ConfigError("snapshot carries no electric field components");
  double peak_air = -1, peak_energy = 0;
  bool air_found = false;
  for (std::size_t i = 0; i < e2.size(); ++i) {
    const double eps = grid.values[i];
    peak_energy = std::max(peak_energy, eps * e2[i]);
    if (eps <= air_eps_threshold) {
      air_found = true;
      peak_air = std::max(peak_air, e2[i]);
    }
  }
  if (!air_found) throw ConfigError("grid contains no air cells");
  if (peak_energy <= 0) throw NumericError("identically zero field");
  return std::sqrt(peak_air / peak_energy);
}

double q_from_linewidth(double lambda_c_nm, double gamma0_nm) {
  if (!(gamma0_nm > 0)) throw ConfigError("linewidth must be positive");
  if (!(lambda_c_nm > 0)) throw ConfigError("wavelength must be positive");
  return lambda_c_nm / gamma0_nm;
}

FundamentalTag identify_fundamental(const std::vector<SweepPoint>& sweep,
                                    double amplitude_floor_rel) {
  if (sweep.empty()) throw ConfigError("empty sweep");
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (!(sweep[i].rbar > sweep[i - 1].rbar))
      throw ConfigError("sweep points must have strictly increasing rbar");

  FundamentalTag tag;
  for (const auto& point : sweep) {
    if (point.spectrum.empty()) throw ConfigError("sweep point has an empty spectrum");
    double amp_max = 0;
    for (const auto& m : point.spectrum) amp_max = std::max(amp_max, std::abs(m.amplitude));
    double best = -1;
    for (const auto& m : point.spectrum) {
      if (std::abs(m.amplitude) < amplitude_floor_rel * amp_max) continue;
      if (best < 0 || m.frequency < best) best = m.frequency;
    }
    tag.frequencies.push_back(best);
  }
  tag.monotone = true;
  for (std::size_t i = 1; i < tag.frequencies.size(); ++i)
    if (!(tag.frequencies[i] > tag.frequencies[i - 1])) tag.monotone = false;
  tag.ambiguous = !tag.monotone && tag.frequencies.size() > 1;
  return tag;
}

CsvTable modes_to_csv(const std::vector<ResonantModeEstimate>& modes) {
  CsvTable table;
  table.columns = {"frequency", "Q", "amplitude_re", "amplitude_im", "residual"};
  for (const auto& m : modes)
    table.rows.push_back({m.frequency, m.Q, m.amplitude.real(), m.amplitude.imag(), m.residual});
  return table;
}

}  // namespace pcc
