/* C interface to the dispersive control library. */
#ifndef DCTL_DCTL_H
#define DCTL_DCTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef DCTL_BUILDING
#    define DCTL_API __declspec(dllexport)
#  else
#    define DCTL_API __declspec(dllimport)
#  endif
#else
#  define DCTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dctl_status {
  DCTL_OK = 0,
  DCTL_E_INVALID_ARGUMENT = 1,
  DCTL_E_CONFIG = 2,
  DCTL_E_CLUSTER_TOO_LARGE = 3,
  DCTL_E_NOT_ON_GAMMA = 4,
  DCTL_E_GRID_TOO_COARSE = 5,
  DCTL_E_NOT_POSITIVE_DEFINITE = 6,
  DCTL_E_SOLVE_FAILURE = 7,
  DCTL_E_ILL_CONDITIONED = 8,
  DCTL_E_CLUSTER_SINGULAR = 9,
  DCTL_E_NO_CONTRACTION = 10,
  DCTL_E_BLOW_UP = 11,
  DCTL_E_DEGENERATE_FIT = 12,
  DCTL_E_ZERO_DENOMINATOR = 13,
  DCTL_E_INTERNAL = 99
} dctl_status;

typedef enum dctl_mode {
  DCTL_MODE_LINEAR = 0,
  DCTL_MODE_NONLINEAR = 1,
  DCTL_MODE_CLOSED_LOOP = 2
} dctl_mode;

typedef enum dctl_component { DCTL_U = 0, DCTL_V = 1 } dctl_component;

typedef struct dctl_params dctl_params;
typedef struct dctl_gain dctl_gain;
typedef struct dctl_state dctl_state;
typedef struct dctl_plan dctl_plan;

DCTL_API const char* dctl_version(void);
DCTL_API const char* dctl_status_name(dctl_status s);
/* Message of the last failed call on this thread; empty after success. */
DCTL_API const char* dctl_last_error(void);

/* Parameters */
DCTL_API dctl_status dctl_params_default(dctl_params** out);
DCTL_API dctl_status dctl_params_direct(double alpha, double mu, double eta, double zeta,
                                        double A, double B, double C, double D,
                                        dctl_params** out);
DCTL_API dctl_status dctl_params_derive(double alpha, double A, double B, double C, double D,
                                        double beta_mean, double gamma_mean, dctl_params** out);
DCTL_API dctl_status dctl_params_linear(const dctl_params* p, double* mu, double* eta,
                                        double* zeta);
DCTL_API void dctl_params_free(dctl_params* p);

/* Spectrum */
DCTL_API dctl_status dctl_omega(const dctl_params* p, int64_t k, double* plus, double* minus);
DCTL_API dctl_status dctl_eigvec(const dctl_params* p, int64_t k, double zplus[2],
                                 double zminus[2]);
DCTL_API dctl_status dctl_h_resonance(int64_t k1, int64_t k2, int64_t k3, double b1, double g1,
                                      double b2, double g2, double* out);
DCTL_API dctl_status dctl_delta_scan(int n, double b1, double g1, double b2, double g2,
                                     double* delta_min, int argmin[3]);

/* Gain profile g */
DCTL_API dctl_status dctl_gain_bump(int n_modes, double center, double radius, dctl_gain** out);
DCTL_API dctl_status dctl_gain_empty(int n_modes, dctl_gain** out);
DCTL_API dctl_status dctl_gain_beta(const dctl_gain* g, int k, double* out);
DCTL_API void dctl_gain_free(dctl_gain* g);

/* State pair (u, v), modes |k| <= n_modes */
DCTL_API dctl_status dctl_state_new(int n_modes, dctl_state** out);
DCTL_API dctl_status dctl_state_set(dctl_state* s, dctl_component c, int k, double re, double im);
DCTL_API dctl_status dctl_state_get(const dctl_state* s, dctl_component c, int k, double* re,
                                    double* im);
DCTL_API dctl_status dctl_state_l2(const dctl_state* s, double* out);
DCTL_API dctl_status dctl_state_energy(const dctl_state* s, double* out);
DCTL_API dctl_status dctl_state_distance(const dctl_state* a, const dctl_state* b, double* out);
DCTL_API void dctl_state_free(dctl_state* s);

/* Open-loop plan steering x0 to x1 in time T under the linear dynamics. */
DCTL_API dctl_status dctl_synthesize(const dctl_params* p, const dctl_gain* g,
                                     const dctl_state* x0, const dctl_state* x1, double T,
                                     dctl_plan** out);
DCTL_API dctl_status dctl_plan_gram_cond(const dctl_plan* plan, double* out);
DCTL_API dctl_status dctl_plan_is_zero(const dctl_plan* plan, int* out);
DCTL_API void dctl_plan_free(dctl_plan* plan);

/* Integrates from x0 over [0, t_end]. gain and plan may be NULL where the mode allows it;
   closed loop uses lambda = 0 feedback. */
DCTL_API dctl_status dctl_simulate(const dctl_params* p, const dctl_gain* g, const dctl_plan* plan,
                                   dctl_mode mode, double dt, double t_end, const dctl_state* x0,
                                   dctl_state** out);

/* Runs one CLI command. Returns the process exit code (0, 2, 3, 4, 5 or 1). */
DCTL_API int dctl_run_command(const char* command, const char* config_json, const char* out_dir,
                              uint64_t seed, int has_seed, char* message, size_t message_len);

#ifdef __cplusplus
}
#endif

#endif
