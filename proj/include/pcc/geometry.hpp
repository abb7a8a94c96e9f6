#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pcc/io.hpp"

namespace pcc {

// Parametric description of the graded-hole square-lattice membrane cavity.
// Lengths in nm, hole radii as fractions of the lattice constant.
struct LatticeSpec {
  double a = 425.0;             // lattice constant (nm)
  int nx = 15;                  // hole columns per half-axis along x
  int ny = 18;                  // hole rows per half-axis along y
  double r_center = 0.23;       // r/a at the cavity center
  double r_edge = 0.35;         // r/a at the cavity edge
  double r_offset = 0.0;        // uniform additive r/a offset
  double grade_exponent = 2.0;  // polynomial grade exponent
  double slab_thickness = 340.0;
  double n_slab = 3.4;
  double cladding_extent = 850.0;  // unpatterned margin around the hole pattern (nm)

  // The fabricated grade profile is only known graphically; the polynomial
  // form here is a configurable stand-in pinned to the center/edge endpoints.
  enum class GradeNorm { Chebyshev, Euclidean };
  GradeNorm grade_norm = GradeNorm::Chebyshev;

  void validate() const;  // throws ConfigError on violated invariants

  static LatticeSpec from_json(const json& j);
  json to_json() const;
};

struct Hole {
  double x = 0;  // center (nm)
  double y = 0;
  double r = 0;  // radius (nm)
};

struct HoleSet {
  std::vector<Hole> holes;

  // Tight bounding box over hole extents: {xmin, ymin, xmax, ymax} in nm.
  std::array<double, 4> bounding_box() const;
};

// Cell-centered relative permittivity on a uniform grid, x-fastest storage.
struct PermittivityGrid {
  std::array<int, 3> dims{0, 0, 0};
  double spacing = 0;  // nm
  std::vector<double> values;
  // Cell (0,0,0) center coordinate; the cavity center sits at the origin.
  std::array<double, 3> origin{0, 0, 0};
  double a = 0;       // lattice constant carried for normalized-unit conversions
  double n_slab = 0;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  void save(const std::filesystem::path& basename) const;  // writes .json + .f64
  static PermittivityGrid load(const std::filesystem::path& sidecar_path);
};

// Hole radius fraction r/a at lattice site (i, j).  Monotone non-decreasing in
// the normalized distance from the center for positive grade exponents.
double grade_profile(const LatticeSpec& spec, int i, int j);

// All (2nx+1) x (2ny+1) holes with four-fold mirror symmetry.
HoleSet build_holes(const LatticeSpec& spec);

// Discretize to a cell-centered permittivity grid with volume-fraction
// averaging of boundary cells.  spacing must resolve the smallest hole by
// at least 4 cells.
PermittivityGrid rasterize(const LatticeSpec& spec, const HoleSet& holes, double spacing);

// Exact area of the intersection between a disk and an axis-aligned
// rectangle; used by the rasterizer and its tests.
double circle_rect_overlap(double cx, double cy, double r, double x0, double y0, double x1,
                           double y1);

}  // namespace pcc
