/* fkmatch — Laplace transforms of squared-Bessel-type diffusions with a
 * Monte Carlo verification suite. C API over an opaque process handle.
 *
 * All functions return FK_OK on success; on failure they return a status
 * code and leave a human-readable message in fk_last_error() (thread-local).
 * Strings returned through char** are owned by the caller and must be
 * released with fk_string_free().
 */
#ifndef FKMATCH_H
#define FKMATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FK_API __declspec(dllexport)
#else
#define FK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fk_status {
    FK_OK = 0,
    FK_ERR_INVALID_ARGUMENT = 1,
    FK_ERR_PARSE = 2,
    FK_ERR_DOMAIN = 3,
    FK_ERR_NUMERICAL = 4,
    FK_ERR_BUDGET = 5,
    FK_ERR_NOT_INVERTIBLE = 6,
    FK_ERR_INTERNAL = 7
} fk_status;

/* Opaque diffusion handle. */
typedef struct fk_process fk_process;

typedef enum fk_scheme {
    FK_SCHEME_AUTO = 0,
    FK_SCHEME_EULER_FULL_TRUNCATION = 1,
    FK_SCHEME_EULER_RECIPROCAL = 2,
    FK_SCHEME_EXACT_BESQ_TERMINAL = 3
} fk_scheme;

typedef struct fk_sim_config {
    double t_end;
    double dt;
    uint64_t n_paths;
    uint64_t seed;
    fk_scheme scheme;
} fk_sim_config;

typedef struct fk_mc_estimate {
    double mean;
    double std_error;
    uint64_t n_paths;
    uint64_t flagged;
} fk_mc_estimate;

FK_API const char* fk_version(void);

/* Message for the most recent error on this thread; empty string if none. */
FK_API const char* fk_last_error(void);

/* Creates a process from a JSON description, e.g.
 *   {"family":"gbesq1","x":1.0,"delta":"2"}
 *   {"family":"gbesq2","x":1.0,"delta":"1+0.5*sin(t)","theta":"-0.5"}
 *   {"family":"srou","x":1.0,"delta":2.0,"alpha":1.0}
 *   {"family":"bridge","x":1.0,"delta":2.0}
 *   {"family":"pgsce","x":1.0,"c":0.5}
 *   {"family":"baff","x":1.0,"a":0.5,"b":1.0}
 *   {"family":"cosh"}
 *   {"family":"geom","preset":"sqrt2x","x":1.0}
 *   {"family":"jacobi","x":0.5,"a":1.5,"b":0.5}
 * "delta"/"theta" accept a number or an expression string in t.
 * Unknown keys are rejected.
 */
FK_API fk_status fk_process_create(const char* spec_json, fk_process** out);
FK_API void fk_process_free(fk_process* p);

/* SDE coefficients (drift, diffusion) at (t, x). */
FK_API fk_status fk_process_coefficients(const fk_process* p, double t, double x,
                                         double* drift, double* diffusion);

/* E exp(-lambda X_t). */
FK_API fk_status fk_laplace_marginal(const fk_process* p, double t, double lambda,
                                     double* out);

/* E exp(-lambda X_t - gamma int_0^t X_u du). */
FK_API fk_status fk_joint_laplace(const fk_process* p, double t, double lambda,
                                  double gamma, double* out);

/* Monte Carlo estimate of E exp(-lambda X_t - gamma int_0^t X_u du). */
FK_API fk_status fk_mc_exp_functional(const fk_process* p, const fk_sim_config* cfg,
                                      double lambda, double gamma,
                                      fk_mc_estimate* out);

/* Monte Carlo estimate of E X_t. */
FK_API fk_status fk_mc_terminal_mean(const fk_process* p, const fk_sim_config* cfg,
                                     fk_mc_estimate* out);

/* Exact squared-Bessel terminal draw (dimension delta, start x0, time t). */
FK_API fk_status fk_sample_besq_terminal(double delta, double x0, double t,
                                         uint64_t seed, uint64_t stream_index,
                                         double* out);

/* Runs one identity check by name (e.g. "hbp_cosh"). overrides_json may be
 * NULL or a JSON object {"paths":..., "dt":..., "seed":..., "params":{...}};
 * returns the report as JSON. */
FK_API fk_status fk_check_identity(const char* name, const char* overrides_json,
                                   char** report_json);

/* Runs the whole identity catalog; returns {"results":[...],"ledger":[...]}. */
FK_API fk_status fk_run_suite(const char* overrides_json, char** report_json);

/* Newline-separated list of identity names. */
FK_API fk_status fk_identity_names(char** names);

FK_API void fk_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* FKMATCH_H */
