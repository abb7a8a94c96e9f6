/* Public C interface of the photonic-crystal cavity toolkit.
 *
 * All entry points return a status code; on failure a thread-local message is
 * available via pcc_last_error().  Strings returned through out-parameters are
 * heap-allocated and must be released with pcc_string_free().
 */
#ifndef PCC_H
#define PCC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define PCC_OK 0
#define PCC_ERR_UNKNOWN 1
#define PCC_ERR_CONFIG 2
#define PCC_ERR_NUMERIC 3
#define PCC_ERR_IO 4

const char* pcc_version(void);

/* Message of the most recent failure on this thread; empty string if none. */
const char* pcc_last_error(void);

void pcc_string_free(char* s);

/* ---- geometry ---------------------------------------------------------- */

typedef struct pcc_grid pcc_grid;

/* Build a permittivity grid from a lattice JSON description at the given cell
 * size (nm). */
int pcc_grid_rasterize(const char* lattice_json, double spacing_nm, pcc_grid** out);

int pcc_grid_load(const char* sidecar_path, pcc_grid** out);
int pcc_grid_save(const pcc_grid* grid, const char* basename);
int pcc_grid_dims(const pcc_grid* grid, int dims[3]);
int pcc_grid_value(const pcc_grid* grid, int i, int j, int k, double* out);
void pcc_grid_free(pcc_grid* grid);

/* ---- direct numeric entry points --------------------------------------- */

/* Damped-sinusoid decomposition of a ringdown record; dt in the same time
 * unit whose inverse the band frequencies use.  *modes_json receives a JSON
 * array of {frequency, Q, amplitude_re, amplitude_im, residual}. */
int pcc_harmonic_inversion(const double* samples, size_t count, double dt, double band_lo,
                           double band_hi, char** modes_json);

/* Fundamental guided mode of a step-index fiber taper from a JSON spec
 * {diameter_um, n_core, n_clad, wavelength_nm}. */
int pcc_taper_solve(const char* fiber_json, char** mode_json);

/* model: "lorentzian" | "exp_offset" | "gaussian". */
int pcc_fit(const char* model, const double* x, const double* y, size_t count,
            char** result_json);

/* Figures of merit from cavity {Q, V_eff, lambda_c, n, eta} and atom
 * {lambda0, gamma_perp} JSON blocks (atom_json may be NULL for defaults). */
int pcc_cqed_assess(const char* cavity_json, const char* atom_json, char** report_json);

int pcc_q_from_linewidth(double lambda_c_nm, double gamma0_nm, double* q);

/* ---- orchestration ------------------------------------------------------ */

/* Run one stage ({"stage": ..., "name": ..., ...}) into output_dir; the
 * summary block of the stage report is returned. */
int pcc_stage_run(const char* stage_json, const char* output_dir, int workers, long long seed,
                  char** summary_json);

/* Run a full pipeline config; returns the manifest JSON. */
int pcc_pipeline_run(const char* config_json, const char* output_dir, int workers,
                     long long seed, char** manifest_json);

/* Run a sweep config {parameter, values, template}; returns the sweep
 * manifest JSON. */
int pcc_sweep_run(const char* config_json, const char* output_dir, int workers, long long seed,
                  char** manifest_json);

#ifdef __cplusplus
}
#endif

#endif /* PCC_H */
