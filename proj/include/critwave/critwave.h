#ifndef CRITWAVE_CRITWAVE_H
#define CRITWAVE_CRITWAVE_H

/* C interface to the critwave library: ground state, spectral constants and
 * the threshold sweep. Every call returns a cw_status; on failure the
 * message is available from cw_last_error() on the same thread.
 *
 * Strings returned through char** are heap-allocated by the library and
 * must be released with cw_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CRITWAVE_BUILDING)
#    define CW_API __declspec(dllexport)
#  else
#    define CW_API __declspec(dllimport)
#  endif
#else
#  define CW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* The nonzero values double as process exit codes for the CLI. */
typedef enum cw_status {
  CW_OK = 0,
  CW_ERR_INTERNAL = 1,
  CW_ERR_CONFIG = 2,
  CW_ERR_NUMERICAL = 3,
  CW_ERR_IO = 4
} cw_status;

typedef struct cw_grid cw_grid;
typedef struct cw_config cw_config;
typedef struct cw_sweep cw_sweep;

CW_API const char* cw_version(void);
/* Message of the last failed call on this thread; "" when none. */
CW_API const char* cw_last_error(void);
CW_API void cw_string_free(char* s);

/* Sinh-mapped radial grid on [0, r_max] with m intervals, in dimension dim. */
CW_API cw_status cw_grid_create(int dim, double r_max, size_t m, double stretch, cw_grid** out);
CW_API void cw_grid_destroy(cw_grid* g);
CW_API cw_status cw_grid_size(const cw_grid* g, size_t* nodes);
/* Copies node positions into r (capacity n, at least cw_grid_size). */
CW_API cw_status cw_grid_nodes(const cw_grid* g, double* r, size_t n);
/* Full-space integral of a radial function sampled at the nodes. */
CW_API cw_status cw_grid_integrate(const cw_grid* g, const double* f, size_t n, double* out);

/* W(r) = (1 + r^2/(N(N-2)))^{-(N-2)/2}. */
CW_API cw_status cw_ground_state(int dim, double r, double* out);

CW_API cw_status cw_config_default(cw_config** out);
CW_API cw_status cw_config_parse(const char* text, cw_config** out);
CW_API cw_status cw_config_load(const char* path, cw_config** out);
CW_API void cw_config_destroy(cw_config* c);
CW_API cw_status cw_config_text(const cw_config* c, char** out);
CW_API cw_status cw_config_set_out_dir(cw_config* c, const char* dir);
CW_API cw_status cw_config_set_threads(cw_config* c, size_t threads);
CW_API cw_status cw_config_out_dir(const cw_config* c, char** out);

/* Ground-state integrals, identity defects and closed-form oracles. */
CW_API cw_status cw_constants_json(int dim, double r_max, size_t m, double stretch, char** out);
/* Spectral stage (omega by two methods, coercivity probe, NLS pair) for
 * the dimension and grid of the config. */
CW_API cw_status cw_spectrum_json(const cw_config* c, char** out);

typedef struct cw_law_fit {
  double eta;
  double slope_T, intercept_T, r_squared_T;
  double slope_S, intercept_S, r_squared_S;
  double predicted_T, predicted_S;
  double rel_dev_T, rel_dev_S;
  double band_C;
  int band_ok;
  size_t points;
} cw_law_fit;

CW_API cw_status cw_sweep_run(const cw_config* c, cw_sweep** out);
CW_API void cw_sweep_destroy(cw_sweep* s);
CW_API cw_status cw_sweep_summary_json(const cw_sweep* s, char** out);
CW_API cw_status cw_sweep_report_markdown(const cw_sweep* s, char** out);
/* summary.json, metadata.json, report.md and traces/ under dir. */
CW_API cw_status cw_sweep_write(const cw_sweep* s, const char* dir);
CW_API cw_status cw_sweep_record_count(const cw_sweep* s, size_t* n);
CW_API cw_status cw_sweep_fit_count(const cw_sweep* s, size_t* n);
CW_API cw_status cw_sweep_fit(const cw_sweep* s, size_t k, cw_law_fit* out);

/* Re-fits the records of an existing summary.json text. */
CW_API cw_status cw_fit_summary(const char* summary_json, char** out);
CW_API cw_status cw_fit_summary_file(const char* path, char** out);

#ifdef __cplusplus
}
#endif

#endif
