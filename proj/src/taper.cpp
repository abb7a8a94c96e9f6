#include "pcc/taper.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kVacuumImpedance = 376.730313668;  // ohm
constexpr int kAzimuthalOrder = 1;                  // HE11 family

double bessel_j_prime(int m, double x) {
  return 0.5 * (std::cyl_bessel_j(m - 1, x) - std::cyl_bessel_j(m + 1, x));
}

double bessel_k_prime(int m, double x) {
  return -0.5 * (std::cyl_bessel_k(m - 1, x) + std::cyl_bessel_k(m + 1, x));
}

struct CharParams {
  double R;   // core radius (nm)
  double k0;  // rad/nm
  double n1;
  double n2;
  double V;
};

// Tangential-continuity matrix for (Ez_core, Hz_core, Ez_clad, Hz_clad)
// amplitudes in the real representation.  Its determinant vanishes at guided
// modes.  Rows are scaled to unit max magnitude so the sign is bracketable.
double characteristic(const CharParams& p, double u) {
  const int m = kAzimuthalOrder;
  const double w = std::sqrt(std::max(1e-300, p.V * p.V - u * u));
  const double beta =
      std::sqrt(std::max(0.0, p.n1 * p.n1 * p.k0 * p.k0 - (u / p.R) * (u / p.R)));
  const double jm = std::cyl_bessel_j(m, u);
  const double jp = bessel_j_prime(m, u);
  const double km = std::cyl_bessel_k(m, w);
  const double kp = bessel_k_prime(m, w);
  const double pc = p.R * p.R / (u * u);    // 1/kappa^2 in the core
  const double pl = -p.R * p.R / (w * w);   // 1/kappa^2 in the cladding
  const double mbr = m * beta / p.R;

  Eigen::Matrix4d M;
  M << jm, 0, -km, 0,
       0, jm, 0, -km,
       pc * mbr * jm, -pc * p.k0 * (u / p.R) * jp, -pl * mbr * km, pl * p.k0 * (w / p.R) * kp,
       pc * p.k0 * p.n1 * p.n1 * (u / p.R) * jp, -pc * mbr * jm,
           -pl * p.k0 * p.n2 * p.n2 * (w / p.R) * kp, pl * mbr * km;
  for (int r = 0; r < 4; ++r) {
    const double scale = M.row(r).cwiseAbs().maxCoeff();
    if (scale > 0) M.row(r) /= scale;
  }
  return M.determinant();
}

Eigen::Vector4d nullspace(const CharParams& p, double u) {
  const int m = kAzimuthalOrder;
  const double w = std::sqrt(std::max(1e-300, p.V * p.V - u * u));
  const double beta =
      std::sqrt(std::max(0.0, p.n1 * p.n1 * p.k0 * p.k0 - (u / p.R) * (u / p.R)));
  const double jm = std::cyl_bessel_j(m, u);
  const double jp = bessel_j_prime(m, u);
  const double km = std::cyl_bessel_k(m, w);
  const double kp = bessel_k_prime(m, w);
  const double pc = p.R * p.R / (u * u);
  const double pl = -p.R * p.R / (w * w);
  const double mbr = m * beta / p.R;
  Eigen::Matrix4d M;
  M << jm, 0, -km, 0,
       0, jm, 0, -km,
       pc * mbr * jm, -pc * p.k0 * (u / p.R) * jp, -pl * mbr * km, pl * p.k0 * (w / p.R) * kp,
       pc * p.k0 * p.n1 * p.n1 * (u / p.R) * jp, -pc * mbr * jm,
           -pl * p.k0 * p.n2 * p.n2 * (w / p.R) * kp, pl * mbr * km;
  // Column scaling keeps the cladding coefficients well conditioned when
  // K_m(w) is tiny.
  Eigen::Vector4d col_scale;
  for (int c = 0; c < 4; ++c) col_scale[c] = std::max(M.col(c).cwiseAbs().maxCoeff(), 1e-300);
  for (int c = 0; c < 4; ++c) M.col(c) /= col_scale[c];
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(M, Eigen::ComputeFullV);
  Eigen::Vector4d v = svd.matrixV().col(3);
  for (int c = 0; c < 4; ++c) v[c] /= col_scale[c];
  return v;
}

}  // namespace

void FiberSpec::validate() const {
  if (!(diameter_um > 0)) throw ConfigError("fiber diameter must be positive");
  if (!(n_core > n_clad && n_clad >= 1)) throw ConfigError("need n_core > n_clad >= 1");
  if (!(wavelength_nm > 0)) throw ConfigError("wavelength must be positive");
}

FiberSpec FiberSpec::from_json(const json& j) {
  FiberSpec s;
  if (j.contains("diameter")) s.diameter_um = j.at("diameter").get<double>();
  if (j.contains("diameter_um")) s.diameter_um = j.at("diameter_um").get<double>();
  if (j.contains("n_core")) s.n_core = j.at("n_core").get<double>();
  if (j.contains("n_clad")) s.n_clad = j.at("n_clad").get<double>();
  if (j.contains("wavelength")) s.wavelength_nm = j.at("wavelength").get<double>();
  if (j.contains("wavelength_nm")) s.wavelength_nm = j.at("wavelength_nm").get<double>();
  s.validate();
  return s;
}

TaperMode solve_fundamental(const FiberSpec& spec) {
  spec.validate();
  CharParams p;
  p.R = 500.0 * spec.diameter_um;  // um -> nm radius
  p.k0 = 2.0 * kPi / spec.wavelength_nm;
  p.n1 = spec.n_core;
  p.n2 = spec.n_clad;
  p.V = p.R * p.k0 * std::sqrt(p.n1 * p.n1 - p.n2 * p.n2);

  // The fundamental is the smallest-u (largest n_eff) root.  Below the first
  // zero of J1 the characteristic is pole-free, so the first sign change of a
  // fine scan brackets it.
  const double u_lo_limit = 1e-6 * std::min(1.0, p.V);
  const double u_hi_limit = std::min(p.V * (1.0 - 1e-12), 3.8316);
  const int n_scan = 8000;
  double u_lo = 0, u_hi = 0;
  double f_lo = 0;
  double prev_u = u_lo_limit;
  double prev_f = characteristic(p, prev_u);
  bool bracketed = false;
  for (int i = 1; i <= n_scan; ++i) {
    const double u = u_lo_limit + (u_hi_limit - u_lo_limit) * i / n_scan;
    const double f = characteristic(p, u);
    if (std::isfinite(f) && std::isfinite(prev_f) && prev_f * f < 0) {
      u_lo = prev_u;
      u_hi = u;
      f_lo = prev_f;
      bracketed = true;
      break;
    }
    prev_u = u;
    prev_f = f;
  }
  if (!bracketed)
    throw NumericError("fundamental-mode bracketing failed: no sign change in u in (" +
                       std::to_string(u_lo_limit) + ", " + std::to_string(u_hi_limit) +
                       "), V=" + std::to_string(p.V));

  for (int iter = 0; iter < 200 && u_hi - u_lo > 1e-15 * u_hi; ++iter) {
    const double mid = 0.5 * (u_lo + u_hi);
    const double f_mid = characteristic(p, mid);
    if (f_lo * f_mid <= 0) {
      u_hi = mid;
    } else {
      u_lo = mid;
      f_lo = f_mid;
    }
  }
  const double u = 0.5 * (u_lo + u_hi);

  TaperMode mode;
  mode.core_radius = p.R;
  mode.k0 = p.k0;
  mode.n_core = p.n1;
  mode.n_clad = p.n2;
  mode.wavelength_nm = spec.wavelength_nm;
  mode.u = u;
  mode.w = std::sqrt(p.V * p.V - u * u);
  mode.beta = std::sqrt(p.n1 * p.n1 * p.k0 * p.k0 - (u / p.R) * (u / p.R));
  mode.n_eff = mode.beta / p.k0;
  mode.decay_constant = mode.w / p.R;
  mode.dispersion_residual = std::abs(characteristic(p, u));
  if (!(mode.n_eff > p.n2 && mode.n_eff < p.n1))
    throw NumericError("mode solution outside guidance bounds");

  const Eigen::Vector4d c = nullspace(p, u);
  mode.cA = c[0];
  mode.cB = c[1];
  mode.cC = c[2];
  mode.cD = c[3];

  const double power = mode_power_flux(mode);
  const double scale = 1.0 / std::sqrt(std::abs(power));
  mode.cA *= scale;
  mode.cB *= scale;
  mode.cC *= scale;
  mode.cD *= scale;
  return mode;
}

TaperMode::RadialFields TaperMode::radial(double r_nm) const {
  const int m = kAzimuthalOrder;
  RadialFields f;
  const double R = core_radius;
  if (r_nm < R) {
    const double s = u / R;
    const double kappa2 = s * s;
    if (r_nm < 1e-9 * R) {
      const double common = s / (2.0 * kappa2);
      f.er = common * (beta * cA - k0 * cB);
      f.ephi = -f.er;
      f.ez = 0;
      f.hr = -common * (beta * cB - k0 * n_core * n_core * cA);
      f.hphi = -f.hr;
      f.hz = 0;
      return f;
    }
    const double jm = std::cyl_bessel_j(m, s * r_nm);
    const double jp = bessel_j_prime(m, s * r_nm);
    f.ez = cA * jm;
    f.hz = cB * jm;
    f.er = (beta * cA * s * jp - k0 * (m / r_nm) * cB * jm) / kappa2;
    f.ephi = -((m * beta / r_nm) * cA * jm - k0 * s * cB * jp) / kappa2;
    f.hr = -(beta * cB * s * jp - k0 * n_core * n_core * (m / r_nm) * cA * jm) / kappa2;
    f.hphi = (k0 * n_core * n_core * cA * s * jp - (m * beta / r_nm) * cB * jm) / kappa2;
  } else {
    const double t = w / R;
    const double kappa2 = -t * t;
    const double km = std::cyl_bessel_k(m, t * r_nm);
    const double kp = bessel_k_prime(m, t * r_nm);
    f.ez = cC * km;
    f.hz = cD * km;
    f.er = (beta * cC * t * kp - k0 * (m / r_nm) * cD * km) / kappa2;
    f.ephi = -((m * beta / r_nm) * cC * km - k0 * t * cD * kp) / kappa2;
    f.hr = -(beta * cD * t * kp - k0 * n_clad * n_clad * (m / r_nm) * cC * km) / kappa2;
    f.hphi = (k0 * n_clad * n_clad * cC * t * kp - (m * beta / r_nm) * cD * km) / kappa2;
  }
  return f;
}

TaperMode::Transverse TaperMode::field(double x_nm, double y_nm) const {
  const double r = std::hypot(x_nm, y_nm);
  const RadialFields f = radial(r);
  double cosp = 1.0, sinp = 0.0;
  if (r > 0) {
    cosp = x_nm / r;
    sinp = y_nm / r;
  }
  Transverse out;
  out.Ex = f.er * cosp * cosp - f.ephi * sinp * sinp;
  out.Ey = (f.er + f.ephi) * sinp * cosp;
  return out;
}

double mode_power_flux(const TaperMode& mode) {
  // Axial Poynting flux of the azimuthal-order-1 mode:
  // P = (pi / Z0) * integral (er*hphi - ephi*hr) r dr.
  const auto integrand = [&](double r) {
    const auto f = mode.radial(r);
    return (f.er * f.hphi - f.ephi * f.hr) * r;
  };
  const auto simpson = [&](double a, double b, int n) {
    // n must be even
    const double h = (b - a) / n;
    double acc = integrand(a) + integrand(b);
    for (int i = 1; i < n; ++i) acc += integrand(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  const double R = mode.core_radius;
  const double r_outer = R + 45.0 / mode.decay_constant;
  return (kPi / kVacuumImpedance) *
         (simpson(0.0, R, 4000) + simpson(R, r_outer, 20000));
}

json TaperMode::to_json() const {
  json j;
  j["n_eff"] = n_eff;
  j["beta_rad_per_nm"] = beta;
  j["decay_constant_per_nm"] = decay_constant;
  j["u"] = u;
  j["w"] = w;
  j["core_radius_nm"] = core_radius;
  j["n_core"] = n_core;
  j["n_clad"] = n_clad;
  j["wavelength_nm"] = wavelength_nm;
  j["dispersion_residual"] = dispersion_residual;
  return j;
}

}  // namespace pcc
