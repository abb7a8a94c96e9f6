#include "pcc.h"

#include <cstring>
#include <string>

#include "pcc/coupling.hpp"
#include "pcc/cqed.hpp"
#include "pcc/errors.hpp"
#include "pcc/fitting.hpp"
#include "pcc/geometry.hpp"
#include "pcc/modes.hpp"
#include "pcc/pipeline.hpp"
#include "pcc/taper.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PCC_OK;
  } catch (const pcc::ConfigError& e) {
    g_last_error = e.what();
    return PCC_ERR_CONFIG;
  } catch (const pcc::IoError& e) {
    g_last_error = e.what();
    return PCC_ERR_IO;
  } catch (const pcc::NumericError& e) {
    g_last_error = e.what();
    return PCC_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PCC_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return PCC_ERR_UNKNOWN;
  }
}

int require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return PCC_ERR_CONFIG;
  }
  return PCC_OK;
}

}  // namespace

struct pcc_grid {
  pcc::PermittivityGrid grid;
};

extern "C" {

const char* pcc_version(void) { return "1.0.0"; }

const char* pcc_last_error(void) { return g_last_error.c_str(); }

void pcc_string_free(char* s) { delete[] s; }

int pcc_grid_rasterize(const char* lattice_json, double spacing_nm, pcc_grid** out) {
  if (int rc = require(lattice_json && out, "null argument")) return rc;
  return guarded([&] {
    const pcc::LatticeSpec spec = pcc::LatticeSpec::from_json(pcc::json::parse(lattice_json));
    const pcc::HoleSet holes = pcc::build_holes(spec);
    auto* handle = new pcc_grid{pcc::rasterize(spec, holes, spacing_nm)};
    *out = handle;
  });
}

int pcc_grid_load(const char* sidecar_path, pcc_grid** out) {
  if (int rc = require(sidecar_path && out, "null argument")) return rc;
  return guarded([&] { *out = new pcc_grid{pcc::PermittivityGrid::load(sidecar_path)}; });
}

int pcc_grid_save(const pcc_grid* grid, const char* basename) {
  if (int rc = require(grid && basename, "null argument")) return rc;
  return guarded([&] { grid->grid.save(basename); });
}

int pcc_grid_dims(const pcc_grid* grid, int dims[3]) {
  if (int rc = require(grid && dims, "null argument")) return rc;
  dims[0] = grid->grid.dims[0];
  dims[1] = grid->grid.dims[1];
  dims[2] = grid->grid.dims[2];
  return PCC_OK;
}

int pcc_grid_value(const pcc_grid* grid, int i, int j, int k, double* out) {
  if (int rc = require(grid && out, "null argument")) return rc;
  return guarded([&] {
    if (i < 0 || i >= grid->grid.dims[0] || j < 0 || j >= grid->grid.dims[1] || k < 0 ||
        k >= grid->grid.dims[2])
      throw pcc::ConfigError("grid index out of range");
    *out = grid->grid.at(i, j, k);
  });
}

void pcc_grid_free(pcc_grid* grid) { delete grid; }

int pcc_harmonic_inversion(const double* samples, size_t count, double dt, double band_lo,
                           double band_hi, char** modes_json) {
  if (int rc = require(samples && modes_json && count > 0, "null or empty input")) return rc;
  return guarded([&] {
    const std::vector<double> data(samples, samples + count);
    const auto modes =
        pcc::harmonic_inversion(data, dt, pcc::FrequencyBand{band_lo, band_hi});
    pcc::json out = pcc::json::array();
    for (const auto& m : modes) {
      pcc::json mj;
      mj["frequency"] = m.frequency;
      mj["Q"] = m.Q;
      mj["amplitude_re"] = m.amplitude.real();
      mj["amplitude_im"] = m.amplitude.imag();
      mj["residual"] = m.residual;
      mj["q_saturated"] = m.q_saturated;
      mj["degraded_confidence"] = m.degraded_confidence;
      out.push_back(mj);
    }
    *modes_json = dup_string(out.dump());
  });
}

int pcc_taper_solve(const char* fiber_json, char** mode_json) {
  if (int rc = require(fiber_json && mode_json, "null argument")) return rc;
  return guarded([&] {
    const pcc::FiberSpec spec = pcc::FiberSpec::from_json(pcc::json::parse(fiber_json));
    *mode_json = dup_string(pcc::solve_fundamental(spec).to_json().dump());
  });
}

int pcc_fit(const char* model, const double* x, const double* y, size_t count,
            char** result_json) {
  if (int rc = require(model && x && y && result_json && count > 0, "null or empty input"))
    return rc;
  return guarded([&] {
    pcc::SampleSet samples;
    samples.x.assign(x, x + count);
    samples.y.assign(y, y + count);
    const std::string m = model;
    pcc::FitResult result;
    if (m == "lorentzian")
      result = pcc::fit_lorentzian(samples);
    else if (m == "exp_offset")
      result = pcc::fit_exp_offset(samples);
    else if (m == "gaussian")
      result = pcc::fit_gaussian(samples);
    else
      throw pcc::ConfigError("unknown fit model '" + m + "'");
    *result_json = dup_string(result.to_json().dump());
  });
}

int pcc_cqed_assess(const char* cavity_json, const char* atom_json, char** report_json) {
  if (int rc = require(cavity_json && report_json, "null argument")) return rc;
  return guarded([&] {
    const pcc::CavityFigures cavity =
        pcc::CavityFigures::from_json(pcc::json::parse(cavity_json));
    const pcc::AtomSpec atom =
        atom_json ? pcc::AtomSpec::from_json(pcc::json::parse(atom_json)) : pcc::AtomSpec{};
    *report_json = dup_string(pcc::assess(cavity, atom).to_json().dump());
  });
}

int pcc_q_from_linewidth(double lambda_c_nm, double gamma0_nm, double* q) {
  if (int rc = require(q != nullptr, "null argument")) return rc;
  return guarded([&] { *q = pcc::q_from_linewidth(lambda_c_nm, gamma0_nm); });
}

int pcc_stage_run(const char* stage_json, const char* output_dir, int workers, long long seed,
                  char** summary_json) {
  if (int rc = require(stage_json && output_dir && summary_json, "null argument")) return rc;
  return guarded([&] {
    pcc::PipelineConfig cfg;
    cfg.stages = pcc::json::array({pcc::json::parse(stage_json)});
    cfg.output_dir = output_dir;
    cfg.workers = workers;
    cfg.seed = seed;
    const pcc::PipelineResult result = pcc::run_pipeline(cfg);
    *summary_json = dup_string(result.stages.at(0).summary.dump());
  });
}

int pcc_pipeline_run(const char* config_json, const char* output_dir, int workers,
                     long long seed, char** manifest_json) {
  if (int rc = require(config_json && output_dir && manifest_json, "null argument")) return rc;
  return guarded([&] {
    pcc::PipelineConfig cfg = pcc::PipelineConfig::from_json(pcc::json::parse(config_json));
    cfg.output_dir = output_dir;
    if (workers > 0) cfg.workers = workers;
    cfg.seed = seed;
    const pcc::PipelineResult result = pcc::run_pipeline(cfg);
    *manifest_json = dup_string(result.manifest.dump());
  });
}

int pcc_sweep_run(const char* config_json, const char* output_dir, int workers, long long seed,
                  char** manifest_json) {
  if (int rc = require(config_json && output_dir && manifest_json, "null argument")) return rc;
  return guarded([&] {
    const pcc::json manifest =
        pcc::run_sweep(pcc::json::parse(config_json), output_dir, workers > 0 ? workers : 1, seed);
    *manifest_json = dup_string(manifest.dump());
  });
}

}  // extern "C"
