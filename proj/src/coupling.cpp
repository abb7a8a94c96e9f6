#include "pcc/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr double kPi = 3.14159265358979323846;

using cd = std::complex<double>;

// Precomputes everything that does not depend on the taper displacement so
// depth maps stay cheap per offset.
struct OverlapPlan {
  const FieldSnapshot* plane = nullptr;
  const TaperMode* taper = nullptr;
  const CouplingConfig* cfg = nullptr;
  int t_axis = 1;  // taper runs along this lattice axis
  int p_axis = 0;
  int nt = 0, np = 0;
  double delta = 0;
  double norm = 0;              // L2 norm of the plane field
  std::vector<double> kt;       // uniform transverse wavevector grid
  std::vector<cd> taper_hat;    // transverse profile transform, conj-ready
  std::vector<cd> continuation; // evanescent decay across the gap

  OverlapPlan(const FieldSnapshot& pl, const TaperMode& tm, const CouplingConfig& c)
      : plane(&pl), taper(&tm), cfg(&c) {
    c.validate();
    if (pl.dims[2] != 1)
      throw ConfigError("coupling expects a single-layer plane snapshot");
    if (!pl.components.count(c.component))
      throw ConfigError("plane snapshot is missing the " + c.component + " component");
    const double lam = pl.wavelength_nm();
    if (std::abs(lam - tm.wavelength_nm) > 1e-3 * lam)
      throw ConfigError("taper mode wavelength does not match the snapshot frequency");

    t_axis = c.orientation == TaperOrientation::AlongX ? 0 : 1;
    p_axis = 1 - t_axis;
    nt = pl.dims[t_axis];
    np = pl.dims[p_axis];
    delta = pl.spacing;

    const auto& ex = pl.components.at(c.component);
    double n2 = 0;
    for (const cd& v : ex) n2 += std::norm(v);
    norm = std::sqrt(n2) * delta;
    if (norm <= 0) throw ConfigError("plane field is identically zero");

    // Transverse wavevector grid matched to the plane sampling.
    const double dkt = 2 * kPi / (np * delta);
    const int half = np / 2;
    for (int j = -half; j <= half; ++j) kt.push_back(j * dkt);

    // Taper transverse profile through the axis, polarization along the scan
    // direction, sampled well past the evanescent tail.
    const double span = tm.core_radius + 8.0 / tm.decay_constant;
    const int ns = 1601;
    const double ds = 2 * span / (ns - 1);
    std::vector<double> prof(ns);
    for (int i = 0; i < ns; ++i) {
      const double s = -span + i * ds;
      prof[i] = tm.field(s, 0.0).Ex.real();
    }
    taper_hat.resize(kt.size());
    for (std::size_t q = 0; q < kt.size(); ++q) {
      cd sum(0, 0);
      for (int i = 0; i < ns; ++i) {
        const double s = -span + i * ds;
        sum += prof[i] * std::polar(1.0, -kt[q] * s);
      }
      taper_hat[q] = sum * ds;
    }

    const double k0 = tm.k0;
    const double beta = tm.beta;
    continuation.resize(kt.size());
    for (std::size_t q = 0; q < kt.size(); ++q) {
      const double qz2 = beta * beta + kt[q] * kt[q] - k0 * k0;
      continuation[q] = qz2 >= 0 ? cd(std::exp(-std::sqrt(qz2) * c.gap_nm), 0)
                                 : std::polar(1.0, std::sqrt(-qz2) * c.gap_nm);
    }
  }

  cd at(int it, int ip) const {
    const auto& ex = plane->components.at(cfg->component);
    return t_axis == 0 ? ex[plane->index(it, ip, 0)] : ex[plane->index(ip, it, 0)];
  }

  cd amplitude(double axial_nm, double transverse_nm) const {
    const double beta = taper->beta;
    const double fwhm = cfg->interaction_fwhm_nm;
    const double sig = fwhm > 0 ? fwhm / (2 * std::sqrt(2 * std::log(2.0))) : 0;

    // Phase-matched line transform along the taper axis, per transverse row.
    std::vector<cd> a(np, cd(0, 0));
    for (int ip = 0; ip < np; ++ip) {
      cd sum(0, 0);
      for (int it = 0; it < nt; ++it) {
        const double x = plane->origin[t_axis] + it * delta;
        double w = 1.0;
        if (sig > 0) {
          const double u = (x - axial_nm) / sig;
          w = std::exp(-0.5 * u * u);
        }
        sum += at(it, ip) * w * std::polar(1.0, -beta * x);
      }
      a[ip] = sum * delta;
    }

    const double dkt = 2 * kPi / (np * delta);
    cd kappa(0, 0);
    for (std::size_t q = 0; q < kt.size(); ++q) {
      cd ahat(0, 0);
      for (int ip = 0; ip < np; ++ip) {
        const double y = plane->origin[p_axis] + ip * delta;
        ahat += a[ip] * std::polar(1.0, -kt[q] * y);
      }
      ahat *= delta;
      kappa += ahat * std::conj(taper_hat[q]) * continuation[q] *
               std::polar(1.0, kt[q] * transverse_nm);
    }
    kappa *= dkt / (2 * kPi);
    return kappa / norm;
  }
};

}  // namespace

void CouplingConfig::validate() const {
  if (gap_nm < 0) throw ConfigError("gap must be >= 0");
  if (gamma0_nm < 0) throw ConfigError("gamma0 must be >= 0");
  if (added_loading_nm < 0) throw ConfigError("added_loading must be >= 0");
  if (parasitic_fraction < 0 || parasitic_fraction > 1)
    throw ConfigError("parasitic_fraction must lie in [0, 1]");
  if (interaction_fwhm_nm < 0) throw ConfigError("interaction_fwhm must be >= 0");
  if (component != "Ex" && component != "Ey" && component != "Ez")
    throw ConfigError("component must be one of 'Ex', 'Ey', 'Ez'");
}

CouplingConfig CouplingConfig::from_json(const json& j) {
  CouplingConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "gap")
      c.gap_nm = it->get<double>();
    else if (k == "offset_axial")
      c.offset_axial_nm = it->get<double>();
    else if (k == "offset_transverse")
      c.offset_transverse_nm = it->get<double>();
    else if (k == "orientation") {
      const std::string o = it->get<std::string>();
      if (o == "x")
        c.orientation = TaperOrientation::AlongX;
      else if (o == "y")
        c.orientation = TaperOrientation::AlongY;
      else
        throw ConfigError("orientation must be 'x' or 'y'");
    } else if (k == "gamma0")
      c.gamma0_nm = it->get<double>();
    else if (k == "added_loading")
      c.added_loading_nm = it->get<double>();
    else if (k == "parasitic_fraction")
      c.parasitic_fraction = it->get<double>();
    else if (k == "interaction_fwhm")
      c.interaction_fwhm_nm = it->get<double>();
    else if (k == "component")
      c.component = it->get<std::string>();
    else
      throw ConfigError("coupling: unknown key '" + k + "'");
  }
  c.validate();
  return c;
}

json CouplingConfig::to_json() const {
  json j;
  j["gap"] = gap_nm;
  j["offset_axial"] = offset_axial_nm;
  j["offset_transverse"] = offset_transverse_nm;
  j["orientation"] = orientation == TaperOrientation::AlongX ? "x" : "y";
  j["gamma0"] = gamma0_nm;
  j["added_loading"] = added_loading_nm;
  j["parasitic_fraction"] = parasitic_fraction;
  j["interaction_fwhm"] = interaction_fwhm_nm;
  j["component"] = component;
  return j;
}

json CouplingResult::to_json() const {
  json j;
  j["kappa_wg_re"] = kappa_wg.real();
  j["kappa_wg_im"] = kappa_wg.imag();
  j["gamma_wg"] = gamma_wg_nm;
  j["gamma_parasitic"] = gamma_parasitic_nm;
  j["depth"] = depth;
  j["loaded_linewidth"] = loaded_linewidth_nm;
  return j;
}

json DepthMap::to_json() const {
  json j;
  j["offsets_nm"] = offsets_nm;
  j["depths"] = depths;
  j["fwhm_um"] = fwhm_um;
  return j;
}

std::complex<double> fourier_overlap(const FieldSnapshot& plane, const TaperMode& taper,
                                     const CouplingConfig& config) {
  OverlapPlan plan(plane, taper, config);
  return plan.amplitude(config.offset_axial_nm, config.offset_transverse_nm);
}

double transmission_depth(double gamma_wg_nm, double gamma_rest_nm) {
  if (gamma_wg_nm < 0 || gamma_rest_nm < 0) throw ConfigError("rates must be >= 0");
  const double tot = gamma_wg_nm + gamma_rest_nm;
  if (tot <= 0) return 0;
  return 4 * gamma_wg_nm * gamma_rest_nm / (tot * tot);
}

std::vector<double> transmission_spectrum(double lambda_c_nm, double gamma0_nm,
                                          double gamma_wg_nm, double gamma_parasitic_nm,
                                          const std::vector<double>& wavelengths_nm) {
  if (gamma0_nm < 0 || gamma_wg_nm < 0 || gamma_parasitic_nm < 0)
    throw ConfigError("rates must be >= 0");
  const double tot = gamma0_nm + gamma_wg_nm + gamma_parasitic_nm;
  const double depth = transmission_depth(gamma_wg_nm, gamma0_nm + gamma_parasitic_nm);
  const double hw = tot / 2;
  std::vector<double> out;
  out.reserve(wavelengths_nm.size());
  for (double lam : wavelengths_nm) {
    if (tot <= 0) {
      out.push_back(1.0);
      continue;
    }
    const double d = lam - lambda_c_nm;
    out.push_back(1.0 - depth * hw * hw / (d * d + hw * hw));
  }
  return out;
}

std::vector<double> loading_model(double gamma0_nm, double beta_load_nm, double alpha_load_per_nm,
                                  const std::vector<double>& gaps_nm) {
  if (alpha_load_per_nm <= 0) throw ConfigError("alpha_load must be > 0");
  std::vector<double> out;
  out.reserve(gaps_nm.size());
  for (double dz : gaps_nm)
    out.push_back(gamma0_nm + beta_load_nm * std::exp(-alpha_load_per_nm * dz));
  return out;
}

LoadingSplit solve_loading_split(double depth, double gamma0_nm, double gamma_total_nm) {
  if (depth <= 0 || depth >= 1) throw ConfigError("depth must lie in (0, 1)");
  if (gamma_total_nm <= gamma0_nm)
    throw ConfigError("total linewidth must exceed the cold-cavity linewidth");
  // Under-coupled branch of depth = 4 g_wg (g_tot - g_wg) / g_tot^2.
  LoadingSplit s;
  s.gamma_wg_nm = gamma_total_nm * (1 - std::sqrt(1 - depth)) / 2;
  s.gamma_parasitic_nm = gamma_total_nm - gamma0_nm - s.gamma_wg_nm;
  if (s.gamma_parasitic_nm < 0)
    throw ConfigError("no under-coupled split consistent with the given depth");
  return s;
}

CouplingResult couple(const FieldSnapshot& plane, const TaperMode& taper,
                      const CouplingConfig& config) {
  OverlapPlan plan(plane, taper, config);
  const cd ref = plan.amplitude(0.0, 0.0);
  const cd kappa = plan.amplitude(config.offset_axial_nm, config.offset_transverse_nm);
  const double ref2 = std::norm(ref);
  if (ref2 <= 0) throw NumericError("zero reference overlap; cannot calibrate rates");
  const double ratio = std::norm(kappa) / ref2;

  CouplingResult r;
  r.kappa_wg = kappa;
  const double added = config.added_loading_nm * ratio;
  r.gamma_wg_nm = (1 - config.parasitic_fraction) * added;
  r.gamma_parasitic_nm = config.parasitic_fraction * added;
  r.depth = transmission_depth(r.gamma_wg_nm, config.gamma0_nm + r.gamma_parasitic_nm);
  r.loaded_linewidth_nm = config.gamma0_nm + added;
  return r;
}

DepthMap depth_map(const FieldSnapshot& plane, const TaperMode& taper,
                   const CouplingConfig& config, int scan_axis,
                   const std::vector<double>& offsets_nm) {
  if (scan_axis != 0 && scan_axis != 1) throw ConfigError("scan_axis must be 0 or 1");
  OverlapPlan plan(plane, taper, config);
  const double ref2 = std::norm(plan.amplitude(0.0, 0.0));
  if (ref2 <= 0) throw NumericError("zero reference overlap; cannot calibrate rates");
  const bool axial = scan_axis == plan.t_axis;

  DepthMap map;
  map.offsets_nm = offsets_nm;
  map.depths.reserve(offsets_nm.size());
  for (double off : offsets_nm) {
    const double ax = axial ? off : config.offset_axial_nm;
    const double tr = axial ? config.offset_transverse_nm : off;
    const double ratio = std::norm(plan.amplitude(ax, tr)) / ref2;
    const double added = config.added_loading_nm * ratio;
    const double gw = (1 - config.parasitic_fraction) * added;
    const double gp = config.parasitic_fraction * added;
    map.depths.push_back(transmission_depth(gw, config.gamma0_nm + gp));
  }

  // Envelope FWHM from linear interpolation of the half-maximum crossings.
  const auto it = std::max_element(map.depths.begin(), map.depths.end());
  if (it != map.depths.end() && *it > 0) {
    const double half = *it / 2;
    const std::size_t imax = it - map.depths.begin();
    double left = 0, right = 0;
    bool has_left = false, has_right = false;
    for (std::size_t i = imax; i > 0; --i) {
      if (map.depths[i - 1] <= half && map.depths[i] > half) {
        const double f = (half - map.depths[i - 1]) / (map.depths[i] - map.depths[i - 1]);
        left = offsets_nm[i - 1] + f * (offsets_nm[i] - offsets_nm[i - 1]);
        has_left = true;
        break;
      }
    }
    for (std::size_t i = imax + 1; i < map.depths.size(); ++i) {
      if (map.depths[i] <= half && map.depths[i - 1] > half) {
        const double f = (map.depths[i - 1] - half) / (map.depths[i - 1] - map.depths[i]);
        right = offsets_nm[i - 1] + f * (offsets_nm[i] - offsets_nm[i - 1]);
        has_right = true;
        break;
      }
    }
    if (has_left && has_right) map.fwhm_um = (right - left) / 1000.0;
  }
  return map;
}

FieldSnapshot extract_plane(const FieldSnapshot& snapshot, double z_nm) {
  if (snapshot.dims[2] < 1) throw ConfigError("snapshot has no z layers");
  int best = 0;
  double bestd = std::abs(snapshot.origin[2] - z_nm);
  for (int k = 1; k < snapshot.dims[2]; ++k) {
    const double d = std::abs(snapshot.origin[2] + k * snapshot.spacing - z_nm);
    if (d < bestd) {
      bestd = d;
      best = k;
    }
  }
  FieldSnapshot out;
  out.dims = {snapshot.dims[0], snapshot.dims[1], 1};
  out.spacing = snapshot.spacing;
  out.a = snapshot.a;
  out.frequency = snapshot.frequency;
  out.origin = {snapshot.origin[0], snapshot.origin[1],
                snapshot.origin[2] + best * snapshot.spacing};
  for (const auto& [name, src] : snapshot.components) {
    std::vector<std::complex<double>> layer(out.cell_count());
    for (int j = 0; j < out.dims[1]; ++j)
      for (int i = 0; i < out.dims[0]; ++i)
        layer[out.index(i, j, 0)] = src[snapshot.index(i, j, best)];
    out.components[name] = std::move(layer);
  }
  return out;
}

}  // namespace pcc
