/* SPDX-License-Identifier: Apache-2.0 */

#ifndef ABEMLAB_H
#define ABEMLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ABEMLAB_BUILDING)
#    define ABEMLAB_API __declspec(dllexport)
#  else
#    define ABEMLAB_API __declspec(dllimport)
#  endif
#else
#  define ABEMLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum abem_status
{
  ABEM_OK = 0,
  ABEM_ERR_CONFIG = 1,
  ABEM_ERR_NUMERICAL = 2,
  ABEM_ERR_VERIFY = 3,
  ABEM_ERR_IO = 4,
  ABEM_ERR_INVALID_ARGUMENT = 5,
  ABEM_ERR_INTERNAL = 6
} abem_status;

typedef struct abem_experiment abem_experiment;
typedef struct abem_trace abem_trace;

/* Receives one line of progress or report text (no trailing newline). */
typedef void (*abem_write_fn)(const char *text, void *user);

typedef struct abem_level
{
  int level;
  size_t dofs;
  double mu;
  double eta;
  double rho;
  double error;
  double increment;
  double a1_ratio;
  double a2_c;
  double effectivity;
} abem_level;

typedef struct abem_series_check
{
  int available;
  int bounded;
  double reference_value;
  double max_after_burn_in;
} abem_series_check;

typedef struct abem_verification
{
  abem_series_check a1;
  abem_series_check a2;
} abem_verification;

typedef struct abem_selftest
{
  size_t checks;
  size_t failures;
  double worst_relative_error;
} abem_selftest;

ABEMLAB_API const char *abem_version(void);

/* Message and config key of the last failure on the calling thread. The
   strings stay valid until the next failing call on that thread. */
ABEMLAB_API const char *abem_last_error(void);
ABEMLAB_API const char *abem_last_error_field(void);

ABEMLAB_API abem_status abem_experiment_load(const char *path, abem_experiment **out);
ABEMLAB_API abem_status abem_experiment_parse(const char *text, abem_experiment **out);
/* Overrides the output directory of a loaded experiment. */
ABEMLAB_API abem_status abem_experiment_set_outputs(abem_experiment *exp, const char *dir);
/* Runs the experiment and writes its artifacts. `trace` may be NULL; when
   given it receives the adaptive trace, to be released by the caller. */
ABEMLAB_API abem_status abem_experiment_run(abem_experiment *exp, abem_write_fn progress,
                                            void *user, abem_trace **trace);
ABEMLAB_API void abem_experiment_free(abem_experiment *exp);

ABEMLAB_API abem_status abem_trace_read(const char *path, abem_trace **out);
ABEMLAB_API size_t abem_trace_level_count(const abem_trace *trace);
ABEMLAB_API abem_status abem_trace_level(const abem_trace *trace, size_t index, abem_level *out);
/* Least-squares slope of log mu against log dofs over the last half. */
ABEMLAB_API abem_status abem_trace_rate(const abem_trace *trace, double *slope);
/* Fills `out` and returns ABEM_ERR_VERIFY when A1 or A2 grows unboundedly. */
ABEMLAB_API abem_status abem_trace_verify(const abem_trace *trace, abem_verification *out);
ABEMLAB_API void abem_trace_free(abem_trace *trace);

/* Kernel integrals against the adaptive-quadrature oracle. Returns
   ABEM_ERR_NUMERICAL when any check fails. */
ABEMLAB_API abem_status abem_oracle_selftest(size_t pairs, uint64_t seed, abem_write_fn report,
                                             void *user, abem_selftest *out);

#ifdef __cplusplus
}
#endif

#endif /* ABEMLAB_H */
