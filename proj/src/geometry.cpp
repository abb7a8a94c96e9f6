#include "pcc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcc/errors.hpp"

namespace pcc {

void LatticeSpec::validate() const {
  if (a <= 0) throw ConfigError("lattice constant a must be positive");
  if (nx < 0 || ny < 0) throw ConfigError("hole counts nx, ny must be non-negative");
  if (!(r_center > 0 && r_center <= r_edge && r_edge < 0.5))
    throw ConfigError("hole grade must satisfy 0 < r_center <= r_edge < 0.5");
  if (!(r_center + r_offset > 0 && r_center + r_offset < 0.5 && r_edge + r_offset > 0 &&
        r_edge + r_offset < 0.5))
    throw ConfigError("r_offset pushes hole radii outside (0, 0.5)");
  if (grade_exponent <= 0) throw ConfigError("grade_exponent must be positive");
  if (slab_thickness <= 0) throw ConfigError("slab_thickness must be positive");
  if (n_slab < 1) throw ConfigError("n_slab must be >= 1");
  if (cladding_extent < 0) throw ConfigError("cladding_extent must be non-negative");
}

LatticeSpec LatticeSpec::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("lattice spec must be a JSON object");
  LatticeSpec s;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "a") s.a = value.get<double>();
      else if (key == "nx") s.nx = value.get<int>();
      else if (key == "ny") s.ny = value.get<int>();
      else if (key == "r_center") s.r_center = value.get<double>();
      else if (key == "r_edge") s.r_edge = value.get<double>();
      else if (key == "r_offset") s.r_offset = value.get<double>();
      else if (key == "grade_exponent") s.grade_exponent = value.get<double>();
      else if (key == "slab_thickness") s.slab_thickness = value.get<double>();
      else if (key == "n_slab") s.n_slab = value.get<double>();
      else if (key == "cladding_extent") s.cladding_extent = value.get<double>();
      else if (key == "grade_norm") {
        const auto name = value.get<std::string>();
        if (name == "chebyshev") s.grade_norm = GradeNorm::Chebyshev;
        else if (name == "euclidean") s.grade_norm = GradeNorm::Euclidean;
        else throw ConfigError("grade_norm must be 'chebyshev' or 'euclidean'");
      } else {
        throw ConfigError("unknown lattice spec field '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad lattice spec field '" + key + "': " + e.what());
    }
  }
  s.validate();
  return s;
}

json LatticeSpec::to_json() const {
  json j;
  j["a"] = a;
  j["nx"] = nx;
  j["ny"] = ny;
  j["r_center"] = r_center;
  j["r_edge"] = r_edge;
  j["r_offset"] = r_offset;
  j["grade_exponent"] = grade_exponent;
  j["slab_thickness"] = slab_thickness;
  j["n_slab"] = n_slab;
  j["cladding_extent"] = cladding_extent;
  return j;
}

double grade_profile(const LatticeSpec& spec, int i, int j) {
  if (std::abs(i) > spec.nx || std::abs(j) > spec.ny)
    throw ConfigError("lattice index (" + std::to_string(i) + "," + std::to_string(j) +
                      ") outside (" + std::to_string(spec.nx) + "," + std::to_string(spec.ny) +
                      ")");
  const double fx = spec.nx > 0 ? std::abs(i) / static_cast<double>(spec.nx) : 0.0;
  const double fy = spec.ny > 0 ? std::abs(j) / static_cast<double>(spec.ny) : 0.0;
  double rho;
  if (spec.grade_norm == LatticeSpec::GradeNorm::Chebyshev) {
    rho = std::max(fx, fy);
  } else {
    rho = std::min(1.0, std::hypot(fx, fy));
  }
  return spec.r_center + (spec.r_edge - spec.r_center) * std::pow(rho, spec.grade_exponent) +
         spec.r_offset;
}

HoleSet build_holes(const LatticeSpec& spec) {
  spec.validate();
  HoleSet set;
  set.holes.reserve(static_cast<std::size_t>(2 * spec.nx + 1) * (2 * spec.ny + 1));
  for (int j = -spec.ny; j <= spec.ny; ++j) {
    for (int i = -spec.nx; i <= spec.nx; ++i) {
      const double frac = grade_profile(spec, i, j);
      if (frac >= 0.5)
        throw ConfigError("grade produces r/a >= 0.5 at site (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      set.holes.push_back({i * spec.a, j * spec.a, frac * spec.a});
    }
  }
  return set;
}

std::array<double, 4> HoleSet::bounding_box() const {
  const double inf = std::numeric_limits<double>::infinity();
  std::array<double, 4> box{inf, inf, -inf, -inf};
  for (const auto& h : holes) {
    box[0] = std::min(box[0], h.x - h.r);
    box[1] = std::min(box[1], h.y - h.r);
    box[2] = std::max(box[2], h.x + h.r);
    box[3] = std::max(box[3], h.y + h.r);
  }
  return box;
}

namespace {

// Antiderivative of sqrt(r^2 - X^2).
double half_lens(double t, double r) {
  t = std::clamp(t, -r, r);
  return 0.5 * (t * std::sqrt(std::max(0.0, r * r - t * t)) + r * r * std::asin(t / r));
}

// Area of {X <= x, Y <= y} within the disk of radius r centered at origin.
double corner_area(double x, double y, double r) {
  if (x <= -r || y <= -r) return 0.0;
  x = std::min(x, r);
  y = std::min(y, r);
  const double s = std::sqrt(std::max(0.0, r * r - y * y));
  double area = 0.0;
  if (y >= 0) {
    // Outer columns see the full chord, the inner band is cut at Y = y.
    const double left_hi = std::min(x, -s);
    area += 2.0 * (half_lens(left_hi, r) - half_lens(-r, r));
    if (x > -s) {
      const double mid_hi = std::min(x, s);
      area += y * (mid_hi + s) + half_lens(mid_hi, r) - half_lens(-s, r);
    }
    if (x > s) area += 2.0 * (half_lens(x, r) - half_lens(s, r));
  } else {
    if (x > -s) {
      const double mid_hi = std::min(x, s);
      area += y * (mid_hi + s) + half_lens(mid_hi, r) - half_lens(-s, r);
    }
  }
  return std::max(0.0, area);
}

}  // namespace

double circle_rect_overlap(double cx, double cy, double r, double x0, double y0, double x1,
                           double y1) {
  x0 -= cx;
  x1 -= cx;
  y0 -= cy;
  y1 -= cy;
  return corner_area(x1, y1, r) - corner_area(x0, y1, r) - corner_area(x1, y0, r) +
         corner_area(x0, y0, r);
}

PermittivityGrid rasterize(const LatticeSpec& spec, const HoleSet& holes, double spacing) {
  spec.validate();
  if (spacing <= 0) throw ConfigError("grid spacing must be positive");
  double r_min = std::numeric_limits<double>::infinity();
  for (const auto& h : holes.holes) r_min = std::min(r_min, h.r);
  if (!holes.holes.empty() && 2.0 * r_min < 4.0 * spacing)
    throw ConfigError("spacing " + std::to_string(spacing) +
                      " nm too coarse: smallest hole (r=" + std::to_string(r_min) +
                      " nm) needs >= 4 cells per diameter");

  double half_x = spec.cladding_extent;
  double half_y = spec.cladding_extent;
  if (!holes.holes.empty()) {
    const auto box = holes.bounding_box();
    half_x += std::max(std::abs(box[0]), std::abs(box[2]));
    half_y += std::max(std::abs(box[1]), std::abs(box[3]));
  }
  const double half_z = 0.5 * spec.slab_thickness + spec.cladding_extent;

  PermittivityGrid grid;
  grid.spacing = spacing;
  grid.a = spec.a;
  grid.n_slab = spec.n_slab;
  grid.dims = {2 * std::max(1, static_cast<int>(std::ceil(half_x / spacing))),
               2 * std::max(1, static_cast<int>(std::ceil(half_y / spacing))),
               2 * std::max(1, static_cast<int>(std::ceil(half_z / spacing)))};
  const int Nx = grid.dims[0], Ny = grid.dims[1], Nz = grid.dims[2];
  // Cell centers at (i - (N-1)/2) * spacing: exactly mirror-symmetric about 0.
  const double cx0 = (Nx - 1) / 2.0;
  const double cy0 = (Ny - 1) / 2.0;
  const double cz0 = (Nz - 1) / 2.0;
  grid.origin = {-cx0 * spacing, -cy0 * spacing, -cz0 * spacing};

  // Air area fraction per in-plane cell.  Holes are visited in a canonical
  // order so the result does not depend on the caller's hole ordering, and
  // overlap areas are evaluated in |offset| coordinates so mirror-symmetric
  // specs rasterize to bit-exact mirror-symmetric grids.
  std::vector<double> air(static_cast<std::size_t>(Nx) * Ny, 0.0);
  std::vector<Hole> sorted = holes.holes;
  std::sort(sorted.begin(), sorted.end(), [](const Hole& a, const Hole& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.r < b.r;
  });
  const double cell_area = spacing * spacing;
  for (const auto& h : sorted) {
    const int i0 = std::max(0, static_cast<int>(std::floor((h.x - h.r) / spacing + cx0)) - 1);
    const int i1 = std::min(Nx - 1, static_cast<int>(std::ceil((h.x + h.r) / spacing + cx0)) + 1);
    const int j0 = std::max(0, static_cast<int>(std::floor((h.y - h.r) / spacing + cy0)) - 1);
    const int j1 = std::min(Ny - 1, static_cast<int>(std::ceil((h.y + h.r) / spacing + cy0)) + 1);
    for (int j = j0; j <= j1; ++j) {
      const double dy = std::abs((j - cy0) * spacing - h.y);
      for (int i = i0; i <= i1; ++i) {
        const double dx = std::abs((i - cx0) * spacing - h.x);
        const double area = circle_rect_overlap(0.0, 0.0, h.r, dx - 0.5 * spacing,
                                                dy - 0.5 * spacing, dx + 0.5 * spacing,
                                                dy + 0.5 * spacing);
        if (area > 0) air[static_cast<std::size_t>(i) + static_cast<std::size_t>(Nx) * j] += area / cell_area;
      }
    }
  }

  const double eps_slab = spec.n_slab * spec.n_slab;
  grid.values.resize(grid.cell_count());
  for (int k = 0; k < Nz; ++k) {
    const double zc = std::abs((k - cz0) * spacing);
    const double z_lo = zc - 0.5 * spacing;
    const double z_hi = zc + 0.5 * spacing;
    const double half_t = 0.5 * spec.slab_thickness;
    const double fz =
        std::clamp((std::min(z_hi, half_t) - std::min(z_lo, half_t)) / spacing, 0.0, 1.0);
    for (int j = 0; j < Ny; ++j) {
      for (int i = 0; i < Nx; ++i) {
        const double fa =
            std::clamp(air[static_cast<std::size_t>(i) + static_cast<std::size_t>(Nx) * j], 0.0, 1.0);
        grid.values[grid.index(i, j, k)] = 1.0 + (eps_slab - 1.0) * fz * (1.0 - fa);
      }
    }
  }
  return grid;
}

void PermittivityGrid::save(const std::filesystem::path& basename) const {
  const auto data_path = std::filesystem::path(basename.string() + ".f64");
  write_f64(data_path, values);
  json meta;
  meta["format"] = "pcc-grid-v1";
  meta["dims"] = dims;
  meta["spacing_nm"] = spacing;
  meta["origin_nm"] = origin;
  meta["a_nm"] = a;
  meta["n_slab"] = n_slab;
  meta["data_file"] = data_path.filename().string();
  meta["provenance"] = {{"layout", "x-fastest little-endian float64"},
                        {"quantity", "relative permittivity, cell centers"}};
  write_sidecar(std::filesystem::path(basename.string() + ".json"), meta);
}

PermittivityGrid PermittivityGrid::load(const std::filesystem::path& sidecar_path) {
  const json meta = read_sidecar(sidecar_path);
  PermittivityGrid grid;
  try {
    if (meta.at("format").get<std::string>() != "pcc-grid-v1")
      throw IoError("unexpected grid format in " + sidecar_path.string());
    grid.dims = meta.at("dims").get<std::array<int, 3>>();
    grid.spacing = meta.at("spacing_nm").get<double>();
    grid.origin = meta.at("origin_nm").get<std::array<double, 3>>();
    grid.a = meta.at("a_nm").get<double>();
    grid.n_slab = meta.at("n_slab").get<double>();
    const auto data_file = meta.at("data_file").get<std::string>();
    grid.values = read_f64(sidecar_path.parent_path() / data_file, grid.cell_count());
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad grid sidecar " + sidecar_path.string() + ": " + e.what());
  }
  return grid;
}

}  // namespace pcc
