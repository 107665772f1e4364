#ifndef BOLASSO_BOLASSO_H
#define BOLASSO_BOLASSO_H

#include <stddef.h>
#include <stdint.h>

#if defined(BOLASSO_BUILDING_LIBRARY)
#define BL_API __attribute__((visibility("default")))
#else
#define BL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bl_status {
    BL_OK = 0,
    BL_ERR_INPUT = 1,
    BL_ERR_RANGE = 2,
    BL_ERR_SINGULAR = 3,
    BL_ERR_IO = 4,
    BL_ERR_INTERNAL = 5
} bl_status;

typedef struct bl_dataset bl_dataset;
typedef struct bl_problem bl_problem;
typedef struct bl_path bl_path;
typedef struct bl_selection bl_selection;
typedef struct bl_report bl_report;
typedef struct bl_experiment bl_experiment;

/* Message of the last failed call on this thread ("" after success). */
BL_API const char* bl_last_error(void);
BL_API const char* bl_status_name(bl_status status);
BL_API const char* bl_version(void);

/* Datasets. X is row-major n x p. */
BL_API bl_status bl_dataset_create(const double* X, const double* y, int64_t n, int64_t p, bl_dataset** out);
BL_API bl_status bl_dataset_load_csv(const char* path, bl_dataset** out);
BL_API bl_status bl_dataset_save_csv(const bl_dataset* data, const char* path);
BL_API bl_status bl_dataset_shape(const bl_dataset* data, int64_t* n, int64_t* p);
BL_API void bl_dataset_free(bl_dataset* data);

/* Synthetic problems from a generator JSON object (same keys as the config's "generator"). */
BL_API bl_status bl_problem_generate(const char* generator_json, uint64_t seed, bl_problem** out);
BL_API bl_status bl_problem_dataset(const bl_problem* problem, bl_dataset** out);
BL_API bl_status bl_problem_w_true(const bl_problem* problem, double* w, int64_t len);
/* Writes dataset.csv, w_true.csv, covariance.csv and generate.json into dir. */
BL_API bl_status bl_problem_save(const bl_problem* problem, const char* dir);
BL_API void bl_problem_free(bl_problem* problem);

/* Regularization path. max_active < 0 means p. */
BL_API bl_status bl_path_compute(const bl_dataset* data, int max_active, double mu_floor, bl_path** out);
BL_API bl_status bl_path_info(const bl_path* path, double* mu_max, double* mu_end, int64_t* breakpoints,
                              int* degenerate);
/* Weights at mu into w (length p); kkt may be NULL. */
BL_API bl_status bl_path_solve(const bl_path* path, double mu, double* w, int64_t len, double* kkt);
BL_API bl_status bl_path_save_table(const bl_path* path, const char* file);
BL_API void bl_path_free(bl_path* path);

/* Bolasso. scheme: "pairs", "residuals", "split". two_step != 0 runs the restricted variant. */
BL_API bl_status bl_selection_run(const bl_dataset* data, double mu, const char* scheme, int m, uint64_t seed,
                                  int two_step, int workers, bl_selection** out);
/* Writes up to cap 0-based indices; *count receives the intersection size. */
BL_API bl_status bl_selection_intersection(const bl_selection* sel, int32_t* idx, int64_t cap, int64_t* count);
BL_API bl_status bl_selection_frequencies(const bl_selection* sel, double* freq, int64_t len);
BL_API bl_status bl_selection_refit(const bl_selection* sel, double* w, int64_t len, int* ok);
/* JSON run manifest; owned by the handle. */
BL_API const char* bl_selection_manifest(const bl_selection* sel);
BL_API void bl_selection_free(bl_selection* sel);

/* Diagnostics for Gram matrix Q (row-major p x p) and loadings w_true. */
BL_API bl_status bl_diagnose(const double* Q, const double* w_true, int64_t p, bl_report** out);
/* Same, reading Q and w_true from CSV files. */
BL_API bl_status bl_diagnose_files(const char* gram_csv, const char* w_true_csv, bl_report** out);
BL_API bl_status bl_report_flags(const bl_report* report, double* cond_value, double* theta, int* a5, int* a6);
BL_API bl_status bl_report_delta(const bl_report* report, double* delta, int64_t len);
/* JSON report; owned by the handle. */
BL_API const char* bl_report_json(const bl_report* report);
BL_API void bl_report_free(bl_report* report);

/* Experiments from a JSON config. Overrides apply when the pointer is non-NULL / value is >= 0. */
BL_API bl_status bl_experiment_load(const char* config_json, bl_experiment** out);
BL_API bl_status bl_experiment_set_seed(bl_experiment* exp, uint64_t seed);
BL_API bl_status bl_experiment_set_output(bl_experiment* exp, const char* dir);
BL_API bl_status bl_experiment_set_workers(bl_experiment* exp, int workers);
/* kind: "selection", "pattern" or "phase". Writes CSV and JSON files into the output directory. */
BL_API bl_status bl_experiment_run(bl_experiment* exp, const char* kind);
BL_API void bl_experiment_free(bl_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif
