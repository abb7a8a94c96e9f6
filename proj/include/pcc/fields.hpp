#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pcc/io.hpp"

namespace pcc {

// Complex steady-state field pattern accumulated at a single frequency,
// sampled at cell centers.  Lengths in nm, frequency in a/lambda.
struct FieldSnapshot {
  std::array<int, 3> dims{0, 0, 0};
  double spacing = 0;   // nm
  double a = 0;         // lattice constant (nm)
  double frequency = 0; // normalized a/lambda
  std::array<double, 3> origin{0, 0, 0};  // nm coordinate of cell (0,0,0) center
  std::map<std::string, std::vector<std::complex<double>>> components;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  double wavelength_nm() const { return a / frequency; }

  void save(const std::filesystem::path& basename) const;
  static FieldSnapshot load(const std::filesystem::path& sidecar_path);
};

// Scalar time series recorded at one grid point after source turn-off.
struct ProbeRecord {
  std::array<int, 3> location{0, 0, 0};
  std::string component = "Ex";
  std::vector<double> samples;  // values after the source turn-off marker
  double dt = 0;                // sample interval in a/c
  bool short_run_warning = false;  // steps did not outlast the source envelope

  void save(const std::filesystem::path& basename) const;
  static ProbeRecord load(const std::filesystem::path& sidecar_path);
};

}  // namespace pcc
