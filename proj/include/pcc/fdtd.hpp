#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pcc/fields.hpp"
#include "pcc/geometry.hpp"

namespace pcc {

// Normalized unit system: lengths in units of the lattice constant a, time in
// a/c, frequencies as a/lambda.  SI conversions live at the CLI layer.

enum class FieldComponent { Ex, Ey, Ez, Hx, Hy, Hz };

FieldComponent component_from_name(const std::string& name);
std::string component_name(FieldComponent c);

// Mirror parity of the tangential electric field on a symmetry plane at the
// low face of an axis: Odd = electric wall (tangential E forced to zero,
// e.g. Ex odd about the y=0 plane), Even = magnetic wall.
enum class MirrorParity { None, Even, Odd };

struct SymmetrySpec {
  MirrorParity x = MirrorParity::None;
  MirrorParity y = MirrorParity::None;
  MirrorParity z = MirrorParity::None;

  MirrorParity axis(int a) const { return a == 0 ? x : (a == 1 ? y : z); }
  static SymmetrySpec from_json(const json& j);
};

struct PmlSpec {
  int cells = 10;
  double grading_order = 3.0;
  double reflection_target = 1e-8;  // design reflection of the graded profile
  double alpha_max = 0.02;          // CFS pole, stabilizes grazing incidence

  static PmlSpec from_json(const json& j);
};

struct SourceSpec {
  std::array<int, 3> position{0, 0, 0};  // Yee node index
  FieldComponent component = FieldComponent::Hz;
  double center_frequency = 0.25;  // a/lambda
  double bandwidth = 0.05;         // full spectral width (a/lambda)

  static SourceSpec from_json(const json& j);
};

struct ProbeSpec {
  std::array<int, 3> position{0, 0, 0};
  FieldComponent component = FieldComponent::Hz;
};

struct DftSpec {
  double frequency = 0.25;  // a/lambda
  std::vector<FieldComponent> components{FieldComponent::Ex, FieldComponent::Ey,
                                         FieldComponent::Ez};
};

struct RunConfig {
  std::optional<SourceSpec> source;  // absent: free evolution of seeded fields
  SymmetrySpec symmetry;
  std::vector<ProbeSpec> probes;
  int steps = 0;
  double courant_factor = 0.5;  // fraction of the CFL limit
  PmlSpec pml;                  // cells = 0 closes the box with perfect conductors
  std::optional<DftSpec> dft;
  int workers = 1;
  bool monitor_energy = false;
};

struct RunResult {
  std::vector<ProbeRecord> probes;
  std::optional<FieldSnapshot> snapshot;   // cell-centered, post-turn-off DFT
  std::vector<double> energy_trace;        // conserved energy per step, if monitored
  int source_off_step = 0;
};

// Leapfrog Yee solver over a permittivity grid; symmetry planes sit on low
// faces, absorbing layers (CPML) elsewhere unless pml.cells == 0.
class Solver {
 public:
  Solver(const PermittivityGrid& grid, const RunConfig& config);
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  void step();
  int steps_taken() const;
  double dt() const;           // a/c
  double time() const;         // a/c, time of the E field
  int source_off_step() const;

  // Plain quadratic-form energy 0.5 sum(eps|E|^2 + |H|^2) dV at the current
  // (staggered) field times.
  double total_energy() const;
  // Time-centered discrete energy 0.5 sum(eps E^2 + H_prev.H_cur) dV, exactly
  // conserved by the lossless update; requires monitor_energy.
  double conserved_energy() const;
  const std::vector<double>& energy_trace() const;  // one entry per step

  double field(FieldComponent c, int i, int j, int k) const;
  void set_field(FieldComponent c, int i, int j, int k, double value);
  double probe_sample(const ProbeSpec& p) const;

  // Max |div H| over dual cells away from the source (diagnostic).
  double max_divergence_h(int exclusion_radius) const;

  FieldSnapshot assemble_snapshot() const;  // cell-centered DFT accumulation

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const PermittivityGrid& grid, const RunConfig& config);

// Keep the upper half of every mirrored axis (cells N/2 .. N-1); the mirror
// plane lands exactly on the retained low Yee face.
PermittivityGrid crop_octant(const PermittivityGrid& grid, const SymmetrySpec& symmetry);

// Inverse of crop_octant for snapshots: reflect with per-component parities.
FieldSnapshot mirror_expand(const FieldSnapshot& snapshot, const SymmetrySpec& symmetry);

}  // namespace pcc
