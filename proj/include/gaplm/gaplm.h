/* C interface to the spline GEE library: opaque handles, status codes,
 * JSON-configured operations. All functions are thread-safe; the error
 * state is thread-local. */
#ifndef GAPLM_GAPLM_H
#define GAPLM_GAPLM_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GAPLM_API __declspec(dllexport)
#else
#define GAPLM_API __attribute__((visibility("default")))
#endif

typedef struct gaplm_dataset gaplm_dataset;
typedef struct gaplm_fit gaplm_fit;

typedef enum gaplm_status {
  GAPLM_OK = 0,
  GAPLM_E_PARAM_DOMAIN = 1,
  GAPLM_E_NUMERIC_DOMAIN = 2,
  GAPLM_E_DEGENERATE_DESIGN = 3,
  GAPLM_E_DEGENERATE_VARIANCE = 4,
  GAPLM_E_SATURATION = 5,
  GAPLM_E_ILL_CONDITIONED = 6,
  GAPLM_E_SINGULAR_INFORMATION = 7,
  GAPLM_E_NOT_IDENTIFIABLE = 8,
  GAPLM_E_INFEASIBLE_CORRELATION = 9,
  GAPLM_E_NON_CONVERGENCE = 10,
  GAPLM_E_SELECTION_FAILED = 11,
  GAPLM_E_BAND_DEGREE = 12,
  GAPLM_E_IO = 13,
  GAPLM_E_PARSE = 14,
  GAPLM_E_CONFIG = 15,
  GAPLM_E_INTERNAL = 16
} gaplm_status;

GAPLM_API const char* gaplm_version(void);

/* Last error on the calling thread; cleared by any successful call. The
 * returned pointers stay valid until the next library call on the thread. */
GAPLM_API int gaplm_last_error_code(void);
GAPLM_API const char* gaplm_last_error_name(void);
GAPLM_API const char* gaplm_last_error_message(void);
GAPLM_API const char* gaplm_last_error_context_json(void);

/* Dataset handles. options_json:
 *   {"cluster": "cluster", "response": "y",
 *    "linear": ["x1", ...], "additive": ["z1", ...], "rescale": false}      */
GAPLM_API gaplm_status gaplm_dataset_load_csv(const char* path,
                                              const char* options_json,
                                              gaplm_dataset** out);
GAPLM_API gaplm_status gaplm_dataset_parse_csv(const char* text,
                                               const char* options_json,
                                               gaplm_dataset** out);
GAPLM_API gaplm_status gaplm_dataset_save_csv(const gaplm_dataset* dataset,
                                              const char* path,
                                              const char* options_json);
GAPLM_API void gaplm_dataset_free(gaplm_dataset* dataset);
GAPLM_API int gaplm_dataset_num_clusters(const gaplm_dataset* dataset);
GAPLM_API long long gaplm_dataset_num_obs(const gaplm_dataset* dataset);

/* Two-step fit. config_json (all keys optional):
 *   {"link": "gaussian"|"binomial", "correlation": "ind"|"ex"|"ar1",
 *    "alpha": 0.1, "degree": 3, "step1_knots": 0, "step2_knots": 0,
 *    "level": 0.95, "band": false, "projection": "weighted"|"unweighted",
 *    "grid_points": 201, "threads": 1}                                      */
GAPLM_API gaplm_status gaplm_fit_run(const gaplm_dataset* dataset,
                                     const char* config_json, gaplm_fit** out);
GAPLM_API void gaplm_fit_free(gaplm_fit* fit);
GAPLM_API int gaplm_fit_num_linear(const gaplm_fit* fit);
GAPLM_API int gaplm_fit_num_components(const gaplm_fit* fit);
GAPLM_API gaplm_status gaplm_fit_beta(const gaplm_fit* fit, double* out,
                                      int capacity);
GAPLM_API gaplm_status gaplm_fit_beta_se(const gaplm_fit* fit, double* out,
                                         int capacity);
/* Report / curve text; free the returned strings with gaplm_string_free. */
GAPLM_API gaplm_status gaplm_fit_report_json(const gaplm_fit* fit, char** out);
GAPLM_API gaplm_status gaplm_fit_curve_csv(const gaplm_fit* fit,
                                           int component_1based, char** out);

/* Monte Carlo run. config_json:
 *   {"example": 1|2, "n": 250, "m": 0, "correlation": "ex", "nsim": 500,
 *    "seed": 1, "threads": 1, "level": 0.95, "degree": 3,
 *    "record_probe": false, "probe_z": 0.5}
 * Either output pointer may be NULL when not needed.                       */
GAPLM_API gaplm_status gaplm_simulate_run(const char* config_json,
                                          char** report_json,
                                          char** table_text);

GAPLM_API void gaplm_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* GAPLM_GAPLM_H */
