#include "taper_fd_oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace taper_oracle {

namespace {

// Unknown layout: the azimuthal-order-1 mode is described by four radial
// profiles.  e_phi and h_r live on integer nodes r = i h (i = 0 .. N-1, the
// outer node N is a hard wall); e_r and h_phi live on half nodes (i + 1/2) h.
// The longitudinal components are eliminated:
//   e_z(i) = [d/dr (r h_phi) + m h_r] / (k0 eps r)   (integer nodes)
//   h_z(j) = [d/dr (r e_phi) - m e_r] / (k0 r)       (half nodes)
// leaving the first-order system  beta x = M x  with
//   beta e_r   =  k0 h_phi + d/dr e_z
//   beta e_phi = -k0 h_r   + (m/r) e_z
//   beta h_phi =  k0 eps e_r + (m/r) h_z
//   beta h_r   = -k0 eps e_phi - d/dr h_z
// (fields in the real representation; e_z, h_z carry the 90-degree phase).
struct Assembler {
  int N;
  double h;
  double k0;
  double R;
  double eps_core, eps_clad;
  int m = 1;
  std::vector<Eigen::Triplet<double>> trips;

  int idx_ephi(int i) const { return i; }
  int idx_hr(int i) const { return N + i; }
  int idx_er(int j) const { return 2 * N + j; }
  int idx_hphi(int j) const { return 3 * N + j; }

  double eps_tangential(int i) const {
    const double r = i * h;
    if (std::abs(r - R) < 0.25 * h) return 0.5 * (eps_core + eps_clad);
    return r < R ? eps_core : eps_clad;
  }
  double eps_half(int j) const { return (j + 0.5) * h < R ? eps_core : eps_clad; }

  // Coefficients of e_z at integer node i on the unknown vector (empty at the
  // axis and the outer wall where e_z vanishes for m = 1).
  std::vector<std::pair<int, double>> ez_coeffs(int i) const {
    std::vector<std::pair<int, double>> c;
    if (i <= 0 || i >= N) return c;
    const double r = i * h;
    const double scale = 1.0 / (k0 * eps_tangential(i) * r);
    c.push_back({idx_hphi(i), scale * (r + 0.5 * h) / h});
    c.push_back({idx_hphi(i - 1), -scale * (r - 0.5 * h) / h});
    c.push_back({idx_hr(i), scale * m});
    return c;
  }

  // Coefficients of h_z at half node j + 1/2.
  std::vector<std::pair<int, double>> hz_coeffs(int j) const {
    std::vector<std::pair<int, double>> c;
    const double r = (j + 0.5) * h;
    const double scale = 1.0 / (k0 * r);
    if (j + 1 < N) c.push_back({idx_ephi(j + 1), scale * (j + 1) * h / h});
    if (j > 0) c.push_back({idx_ephi(j), -scale * j * h / h});  // r_0 = 0 drops out
    c.push_back({idx_er(j), -scale * m});
    return c;
  }

  void add(int row, int col, double v) { trips.emplace_back(row, col, v); }
  void add_combo(int row, const std::vector<std::pair<int, double>>& combo, double factor) {
    for (const auto& [col, v] : combo) add(row, col, factor * v);
  }

  Eigen::SparseMatrix<double> build() {
    for (int j = 0; j < N; ++j) {
      // beta e_r = k0 h_phi + (e_z(j+1) - e_z(j)) / h
      const int row = idx_er(j);
      add(row, idx_hphi(j), k0);
      add_combo(row, ez_coeffs(j + 1), 1.0 / h);
      add_combo(row, ez_coeffs(j), -1.0 / h);
    }
    for (int i = 0; i < N; ++i) {
      // beta e_phi = -k0 h_r + (m/r) e_z; the axis limit uses e_z'(0).
      const int row = idx_ephi(i);
      add(row, idx_hr(i), -k0);
      if (i == 0)
        add_combo(row, ez_coeffs(1), static_cast<double>(m) / h);
      else
        add_combo(row, ez_coeffs(i), static_cast<double>(m) / (i * h));
    }
    for (int j = 0; j < N; ++j) {
      // beta h_phi = k0 eps e_r + (m/r) h_z
      const int row = idx_hphi(j);
      add(row, idx_er(j), k0 * eps_half(j));
      add_combo(row, hz_coeffs(j), static_cast<double>(m) / ((j + 0.5) * h));
    }
    for (int i = 0; i < N; ++i) {
      // beta h_r = -k0 eps e_phi - d/dr h_z; h_z is odd about the axis.
      const int row = idx_hr(i);
      add(row, idx_ephi(i), -k0 * eps_tangential(i));
      if (i == 0) {
        add_combo(row, hz_coeffs(0), -2.0 / h);
      } else {
        add_combo(row, hz_coeffs(i), -1.0 / h);
        add_combo(row, hz_coeffs(i - 1), 1.0 / h);
      }
    }
    Eigen::SparseMatrix<double> M(4 * N, 4 * N);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
  }
};

}  // namespace

double neff_fd(double core_radius_nm, double n_core, double n_clad, double wavelength_nm,
               int n_cells, double domain_factor) {
  if (!(core_radius_nm > 0 && n_core > n_clad && n_clad > 0 && wavelength_nm > 0 &&
        n_cells >= 16))
    throw std::invalid_argument("bad oracle arguments");

  Assembler a;
  a.N = n_cells;
  a.R = core_radius_nm;
  a.h = domain_factor * core_radius_nm / n_cells;
  a.k0 = 2.0 * std::numbers::pi / wavelength_nm;
  a.eps_core = n_core * n_core;
  a.eps_clad = n_clad * n_clad;
  const Eigen::SparseMatrix<double> M = a.build();

  // Shift-invert inverse iteration between the two light lines.  The guided
  // spectrum there holds only the fundamental (the structure is single-mode
  // at the tested V numbers) plus one spurious transverse solution pinned at
  // exactly n_core, so a shift at 70% of the contrast picks the fundamental.
  const double sigma = (n_clad + 0.7 * (n_core - n_clad)) * a.k0;
  Eigen::SparseMatrix<double> A = -M;
  for (int d = 0; d < A.rows(); ++d) A.coeffRef(d, d) += sigma;
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("oracle factorization failed");

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd x(4 * n_cells);
  for (int i = 0; i < x.size(); ++i) x[i] = uni(rng);
  x.normalize();
  double beta = 0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd y = lu.solve(x);
    y.normalize();
    x = y;
    const Eigen::VectorXd mx = M * x;
    beta = x.dot(mx);
    if ((mx - beta * x).norm() < 1e-12 * std::abs(beta) && it > 5) break;
  }
  return beta / a.k0;
}

double neff_fd_richardson(double core_radius_nm, double n_core, double n_clad,
                          double wavelength_nm, int n_cells, double domain_factor) {
  const double coarse = neff_fd(core_radius_nm, n_core, n_clad, wavelength_nm, n_cells,
                                domain_factor);
  const double fine = neff_fd(core_radius_nm, n_core, n_clad, wavelength_nm, 2 * n_cells,
                              domain_factor);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace taper_oracle
