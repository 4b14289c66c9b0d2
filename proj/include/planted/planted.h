/* C interface to the planted-signal library. All functions return a
 * pl_status; on failure pl_last_error() describes the problem for the
 * calling thread. */
#ifndef PLANTED_PLANTED_H
#define PLANTED_PLANTED_H

#include <stddef.h>
#include <stdint.h>

#if defined(PLANTED_BUILDING)
#define PL_API __attribute__((visibility("default")))
#else
#define PL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  PL_OK = 0,
  PL_ERR_INVALID_ARGUMENT = 1,
  PL_ERR_DOMAIN = 2,
  PL_ERR_INFEASIBLE = 3,
  PL_ERR_IO = 4,
  PL_ERR_NUMERIC = 5,
  PL_ERR_INTERNAL = 6
} pl_status;

typedef enum { PL_SPARSE_PCA = 0, PL_SUBMATRIX = 1, PL_CLUSTERING = 2 } pl_problem;
typedef enum { PL_NULL = 0, PL_PLANTED = 1 } pl_hypothesis;
typedef enum { PL_SPECTRAL = 0, PL_GLR = 1 } pl_detector;

/* snr is lambda, mu or rho. gamma is used by sparse PCA, alpha by
 * clustering, k by submatrix and clustering. */
typedef struct {
  int problem;
  double snr;
  double gamma;
  double alpha;
  int32_t k;
  int64_t n;
} pl_params;

typedef struct {
  double upper;
  double lower_theorem;
  double lower_psi;
  double lower_lambert;
  double spectral;
  int has_lower_psi;
  int has_lower_lambert;
} pl_bounds;

typedef struct {
  double statistic;
  double threshold;
  int decision; /* pl_hypothesis */
  int spectrally_indistinguishable;
  double elapsed_seconds;
} pl_detection;

/* Rates over one (params, detector) cell. Columns for a hypothesis that was
 * not simulated are NaN. */
typedef struct {
  double detect_rate_planted;
  double false_positive_rate_null;
  double mean_overlap; /* theta^2 for sparse PCA, L2 overlap otherwise */
  double mean_signal_correlation;
  int64_t trials;
} pl_cell_result;

typedef struct {
  double value;
  double log_value;
  double standard_error;
  int has_standard_error;
  int64_t trials;
} pl_moment;

typedef struct {
  double beta;
  double mmse;
  double se_mmse;
  double posterior_norm;
  double se_posterior_norm;
  double mutual_info;
  double se_mutual_info;
  int64_t trials;
} pl_mmse_row;

typedef struct pl_instance pl_instance;

PL_API const char* pl_last_error(void);
PL_API const char* pl_status_name(pl_status status);

PL_API pl_status pl_problem_parse(const char* name, int* problem);
PL_API const char* pl_problem_name(int problem);

/* Seed of sub-stream `index` of `master`. */
PL_API uint64_t pl_substream_seed(uint64_t master, uint64_t index);

PL_API pl_status pl_params_validate(const pl_params* params);
/* Snaps integrality constraints. note receives a description of the change
 * (empty if none) and is truncated to note_len bytes. */
PL_API pl_status pl_params_round(const pl_params* in, pl_params* out, char* note, size_t note_len);

PL_API pl_status pl_bounds_compute(const pl_params* params, pl_bounds* out);
/* Writes a NUL-terminated JSON record. *needed receives the buffer size
 * required, including the terminator. */
PL_API pl_status pl_bounds_json(const pl_params* params, char* buf, size_t cap, size_t* needed);

PL_API pl_status pl_instance_generate(const pl_params* params, int hypothesis, uint64_t seed,
                                      pl_instance** out);
PL_API pl_status pl_instance_from_matrix(const pl_params* params, const double* data,
                                         int64_t rows, int64_t cols, pl_instance** out);
PL_API void pl_instance_free(pl_instance* instance);
PL_API pl_status pl_instance_shape(const pl_instance* instance, int64_t* rows, int64_t* cols);
/* Row-major view, valid until the instance is freed. */
PL_API const double* pl_instance_data(const pl_instance* instance);
PL_API pl_status pl_instance_info(const pl_instance* instance, pl_params* params,
                                  int* hypothesis, uint64_t* seed);
PL_API pl_status pl_instance_save(const pl_instance* instance, const char* path);
PL_API pl_status pl_instance_load(const char* path, pl_instance** out);
PL_API pl_status pl_instance_write_text(const pl_instance* instance, const char* path);

PL_API pl_status pl_detect(const pl_instance* instance, int detector, pl_detection* out);

PL_API pl_status pl_simulate_cell(const pl_params* params, int detector, int64_t trials,
                                  uint64_t seed, int threads, int with_planted, int with_null,
                                  pl_cell_result* out);

PL_API pl_status pl_second_moment_exact(const pl_params* params, pl_moment* out);
PL_API pl_status pl_second_moment_mc(const pl_params* params, int64_t trials, uint64_t seed,
                                     int threads, pl_moment* out);

/* out must hold `count` rows. */
PL_API pl_status pl_mmse_curve(const pl_params* params, const double* betas, size_t count,
                               int64_t trials, uint64_t seed, int threads, pl_mmse_row* out);

#ifdef __cplusplus
}
#endif

#endif
