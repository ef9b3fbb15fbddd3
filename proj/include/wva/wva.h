/* C interface to the weak-value sensing library.
 *
 * Every call returns a wva_status. On failure, wva_last_error() describes
 * the problem; the message is thread-local and valid until the next call
 * from the same thread. Strings returned through char** are owned by the
 * caller and released with wva_string_free().
 */
#ifndef WVA_WVA_H
#define WVA_WVA_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WVA_API __declspec(dllexport)
#else
#define WVA_API __attribute__((visibility("default")))
#endif

typedef enum wva_status {
  WVA_OK = 0,
  WVA_ERROR_INVALID_ARGUMENT = 1,
  WVA_ERROR_VALIDATION = 2,
  WVA_ERROR_DOMAIN = 3,
  WVA_ERROR_SINGULAR = 4,
  WVA_ERROR_UNDEFINED_STATE = 5,
  WVA_ERROR_MODEL = 6,
  WVA_ERROR_CONFIG = 7,
  WVA_ERROR_IO = 8,
  WVA_ERROR_INTERNAL = 9
} wva_status;

typedef enum wva_readout { WVA_READOUT_POSTSELECTED = 0, WVA_READOUT_ORTHOGONAL = 1, WVA_READOUT_TRACED = 2 } wva_readout;

typedef enum wva_placement { WVA_NOISE_ON_SYSTEM = 0, WVA_NOISE_ON_METER = 1 } wva_placement;

typedef struct wva_config wva_config;
typedef struct wva_noise_model wva_noise_model;

typedef struct wva_report {
  double a_factor;
  double q;
  double h_d;
  double h_anc;
  double h_wva;
  double q_h_wva;
  double h_perp;
  double weighted_h_perp;
  double h_total;
  double ratio_direct;
  double ratio_anc;
  int postselected_defined;
  int orthogonal_defined;
} wva_report;

typedef struct wva_noisy_meter_report {
  double h_anc_tilde;
  double h_wva_tilde;
  double q_h_wva_tilde;
  double q;
  int defined;
} wva_noisy_meter_report;

WVA_API const char* wva_version(void);
WVA_API const char* wva_last_error(void);
WVA_API const char* wva_status_string(wva_status status);
WVA_API void wva_string_free(char* s);

/* Protocol configuration. Names: "G", "theta" (absolute), "theta_rel"
 * (relative to t*delta_b, the default mode), "Theta" (control angle;
 * defaults to theta + pi/2), "delta_b", "t", "xi", "sigma". */
WVA_API wva_status wva_config_create(wva_config** out);
WVA_API void wva_config_destroy(wva_config* cfg);
WVA_API wva_status wva_config_set(wva_config* cfg, const char* name, double value);
WVA_API wva_status wva_config_get(const wva_config* cfg, const char* name, double* out);
WVA_API wva_status wva_config_validate(const wva_config* cfg);
/* Flat JSON object with the keys above plus "gamma" (Xi = exp(-gamma t)).
 * Unspecified keys take the main-text defaults G = 1, theta_rel = pi,
 * xi = 1, t = 1, delta_b = 0, sigma = 1. */
WVA_API wva_status wva_config_from_json(const char* options_json, wva_config** out);

WVA_API wva_status wva_parse_angle(const char* text, double* out);

WVA_API wva_status wva_compute_report(const wva_config* cfg, wva_report* out);
WVA_API wva_status wva_f_direct(const wva_config* cfg, double* out);
WVA_API wva_status wva_h_direct(double t, double xi, double* out);
WVA_API wva_status wva_h_anc(const wva_config* cfg, double* out);
/* general != 0 selects the independent-angle meter state. */
WVA_API wva_status wva_meter_coherence(const wva_config* cfg, int general, double* re, double* im);
WVA_API wva_status wva_noisy_meter(const wva_config* cfg, wva_noisy_meter_report* out);
/* Brute-force circuit QFI with central differences (step in [1e-7, 1e-3]). */
WVA_API wva_status wva_oracle_qfi(const wva_config* cfg, wva_readout readout, wva_placement placement, double step,
                                  double* h, double* q);

WVA_API wva_status wva_noise_model_exponential(double gamma, wva_noise_model** out);
WVA_API wva_status wva_noise_model_gaussian(double gamma, wva_noise_model** out);
WVA_API wva_status wva_noise_model_constant(double xi, wva_noise_model** out);
/* Two-column CSV with header `t,xi`. */
WVA_API wva_status wva_noise_model_load_csv(const char* path, wva_noise_model** out);
WVA_API void wva_noise_model_destroy(wva_noise_model* model);
WVA_API wva_status wva_noise_model_xi(const wva_noise_model* model, double t, double* out);

/* JSON-level entry points used by the command-line tool. Option objects are
 * flat JSON mirroring the CLI flag names; angles may be strings like "pi/2". */
WVA_API wva_status wva_point_json(const wva_config* cfg, char** out_json);
WVA_API wva_status wva_figure_write(const char* name, const char* options_json, const char* out_dir,
                                    char** summary_json);
WVA_API wva_status wva_verify_json(const char* options_json, int* passed, char** report_json);
WVA_API wva_status wva_mle_json(const char* options_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* WVA_WVA_H */
