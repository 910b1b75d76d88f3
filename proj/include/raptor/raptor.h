#ifndef RAPTOR_RAPTOR_H
#define RAPTOR_RAPTOR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RAPTOR_BUILDING_LIBRARY)
#    define RAPTOR_API __declspec(dllexport)
#  else
#    define RAPTOR_API __declspec(dllimport)
#  endif
#else
#  define RAPTOR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum raptor_status {
    RAPTOR_OK = 0,
    RAPTOR_E_INVALID_ARGUMENT = 1,
    RAPTOR_E_DIMENSION_MISMATCH = 2,
    RAPTOR_E_INSUFFICIENT_CLASS_COUNT = 3,
    RAPTOR_E_SINGLE_CLASS = 4,
    RAPTOR_E_NON_CONVERGENCE = 5,
    RAPTOR_E_ZERO_WEIGHT_VECTOR = 6,
    RAPTOR_E_EMPTY_GRID = 7,
    RAPTOR_E_MISALIGNED_DIRECTION = 8,
    RAPTOR_E_MISSING_LAYER = 9,
    RAPTOR_E_EMPTY_EVALUATION_SET = 10,
    RAPTOR_E_NOT_UNIT_NORM = 11,
    RAPTOR_E_DEGENERATE_ABLATION = 12,
    RAPTOR_E_INVALID_REGIME = 13,
    RAPTOR_E_DEGENERATE_ZERO_ESTIMATOR = 14,
    RAPTOR_E_EMPTY_ORACLE_SAMPLES = 15,
    RAPTOR_E_IO = 16,
    RAPTOR_E_FORMAT = 17,
    RAPTOR_E_OUT_OF_MEMORY = 18,
    RAPTOR_E_INTERNAL = 19
} raptor_status;

/// Message of the last failed call on this thread; empty after success.
RAPTOR_API const char* raptor_last_error(void);
RAPTOR_API const char* raptor_status_string(raptor_status status);
RAPTOR_API const char* raptor_version(void);

typedef struct raptor_dataset raptor_dataset;
typedef struct raptor_probe raptor_probe;
typedef struct raptor_robustness raptor_robustness;
typedef struct raptor_steering raptor_steering;
typedef struct raptor_fixed_point raptor_fixed_point;
typedef struct raptor_sweep raptor_sweep;

/* ---- datasets ---------------------------------------------------------- */

/// Copies an n x p row-major matrix and n labels in {0, 1}. Pass
/// has_layer = 0 when the dataset has no layer id.
RAPTOR_API raptor_status raptor_dataset_create(const double* features, size_t n, size_t p,
                                               const int* labels, int has_layer,
                                               uint32_t layer_id, raptor_dataset** out);

/// Gaussian teacher-student data; the handle remembers seed, kappa and the
/// teacher direction so that saving writes them alongside the matrix.
RAPTOR_API raptor_status raptor_dataset_generate(size_t p, size_t n, double kappa, uint64_t seed,
                                                 raptor_dataset** out);

RAPTOR_API raptor_status raptor_dataset_load(const char* path, raptor_dataset** out);

/// Writes `path`, `path.manifest` and, for generated data, `path.teacher`.
RAPTOR_API raptor_status raptor_dataset_save(const raptor_dataset* data, const char* path);

RAPTOR_API size_t raptor_dataset_rows(const raptor_dataset* data);
RAPTOR_API size_t raptor_dataset_cols(const raptor_dataset* data);
/// Returns 1 and stores the layer id when present, 0 otherwise.
RAPTOR_API int raptor_dataset_layer(const raptor_dataset* data, uint32_t* layer_id);
RAPTOR_API raptor_status raptor_dataset_set_layer(raptor_dataset* data, uint32_t layer_id);
RAPTOR_API raptor_status raptor_dataset_features(const raptor_dataset* data, double* out);
RAPTOR_API raptor_status raptor_dataset_labels(const raptor_dataset* data, int* out);
/// Teacher direction (length p) of generated data; RAPTOR_E_INVALID_ARGUMENT otherwise.
RAPTOR_API raptor_status raptor_dataset_teacher(const raptor_dataset* data, double* out);
RAPTOR_API void raptor_dataset_free(raptor_dataset* data);

/// Perceptron separability check: *separable is 1 for separable, 0 for
/// undetermined after max_epochs.
RAPTOR_API raptor_status raptor_dataset_separability(const raptor_dataset* data, int max_epochs,
                                                     int* separable, int* epochs);

/// Reads a bare matrix file (for example per-layer hidden states). The buffer
/// is n x p row-major and must be released with raptor_buffer_free. A layer
/// id is taken from the manifest when one exists; *has_layer reports it.
RAPTOR_API raptor_status raptor_matrix_load(const char* path, double** data, size_t* n, size_t* p,
                                            int* has_layer, uint32_t* layer_id);
RAPTOR_API raptor_status raptor_matrix_save(const char* path, const double* data, size_t n,
                                            size_t p, int has_layer, uint32_t layer_id);
RAPTOR_API void raptor_buffer_free(double* data);

/* ---- probes ------------------------------------------------------------ */

typedef struct raptor_probe_options {
    double test_frac;
    double val_frac;
    uint64_t seed;
    const char* grid_spec; /* "lo:hi:count:log|lin" over C = 1/lambda; NULL for the default */
    int warm_start;
    double tol;
    int max_iter;
} raptor_probe_options;

RAPTOR_API void raptor_probe_options_default(raptor_probe_options* opts);

/// Split, standardize on train, tune lambda on val, refit on train+val,
/// fold back to native coordinates.
RAPTOR_API raptor_status raptor_probe_train(const raptor_dataset* data,
                                            const raptor_probe_options* opts, raptor_probe** out);

RAPTOR_API raptor_status raptor_probe_load(const char* path, raptor_probe** out);
RAPTOR_API raptor_status raptor_probe_save(const raptor_probe* probe, const char* path);

RAPTOR_API size_t raptor_probe_dim(const raptor_probe* probe);
RAPTOR_API double raptor_probe_lambda(const raptor_probe* probe);
/// NaN when unavailable (no validation tuning or empty test split).
RAPTOR_API double raptor_probe_val_accuracy(const raptor_probe* probe);
RAPTOR_API double raptor_probe_test_accuracy(const raptor_probe* probe);
RAPTOR_API double raptor_probe_intercept(const raptor_probe* probe);
RAPTOR_API raptor_status raptor_probe_omega(const raptor_probe* probe, double* out);
RAPTOR_API raptor_status raptor_probe_direction(const raptor_probe* probe, double* out);
RAPTOR_API raptor_status raptor_probe_logit(const raptor_probe* probe, const double* h,
                                            double* out);
/// Returns 1 and stores the layer id when present, 0 otherwise.
RAPTOR_API int raptor_probe_layer(const raptor_probe* probe, uint32_t* layer_id);
RAPTOR_API raptor_status raptor_probe_set_layer(raptor_probe* probe, uint32_t layer_id);
RAPTOR_API void raptor_probe_free(raptor_probe* probe);

/* ---- robustness -------------------------------------------------------- */

typedef struct raptor_robust_options {
    size_t k_runs;
    double drop_frac;
    double val_frac;
    uint64_t seed;
    size_t jobs;
    const char* grid_spec; /* NULL for the default grid */
    int fixed_lambda;      /* nonzero: skip tuning and fit at `lambda` */
    double lambda;
} raptor_robust_options;

RAPTOR_API void raptor_robust_options_default(raptor_robust_options* opts);

/// One dataset per layer; the whole dataset is the ablation pool. Layers
/// without an id are numbered by position.
RAPTOR_API raptor_status raptor_robustness_run(const raptor_dataset* const* layers,
                                               size_t n_layers, const raptor_robust_options* opts,
                                               raptor_robustness** out);

RAPTOR_API size_t raptor_robustness_layers(const raptor_robustness* rep);
RAPTOR_API raptor_status raptor_robustness_layer(const raptor_robustness* rep, size_t index,
                                                 uint32_t* layer_id, double* score);
RAPTOR_API double raptor_robustness_mean(const raptor_robustness* rep);
RAPTOR_API void raptor_robustness_best(const raptor_robustness* rep, uint32_t* layer_id,
                                       double* score);
RAPTOR_API raptor_status raptor_robustness_write_csv(const raptor_robustness* rep,
                                                     const char* path);
RAPTOR_API void raptor_robustness_free(raptor_robustness* rep);

/* ---- steering ---------------------------------------------------------- */

typedef enum raptor_steer_mode { RAPTOR_STEER_TOWARDS = 0, RAPTOR_STEER_AWAY = 1 } raptor_steer_mode;

typedef enum raptor_skip_reason {
    RAPTOR_SKIP_NONE = 0,
    RAPTOR_SKIP_LOW_ACCURACY = 1,
    RAPTOR_SKIP_MISALIGNED_DIRECTION = 2
} raptor_skip_reason;

typedef struct raptor_steer_options {
    double target_prob;
    raptor_steer_mode mode;
    int has_tau;
    double tau;
} raptor_steer_options;

typedef struct raptor_steer_outcome {
    uint32_t layer_id;
    size_t prompt;
    double alpha;
    int intervened;
    double pre_prob;
    double post_prob;
    raptor_skip_reason skipped_reason;
} raptor_steer_outcome;

typedef struct raptor_steer_summary {
    size_t evaluated;
    size_t skipped;
    double success_rate;
    double intervention_rate;
    double alpha_median;
    double alpha_p90;
    double alpha_max;
} raptor_steer_summary;

RAPTOR_API void raptor_steer_options_default(raptor_steer_options* opts);

/// Closed-form steering strength for one hidden state along the probe direction.
RAPTOR_API raptor_status raptor_gcav_alpha(const raptor_probe* probe, const double* h,
                                           const raptor_steer_options* opts, double* alpha);

/// probes[i] steers layer layer_ids[i] using hidden[i], an n_prompts x dim
/// row-major matrix. Outcomes are prompt-major, layers ascending.
RAPTOR_API raptor_status raptor_steer_run(const raptor_probe* const* probes,
                                          const uint32_t* layer_ids, const double* const* hidden,
                                          size_t n_layers, size_t n_prompts,
                                          const raptor_steer_options* opts, raptor_steering** out);

RAPTOR_API size_t raptor_steering_count(const raptor_steering* run);
RAPTOR_API raptor_status raptor_steering_outcome(const raptor_steering* run, size_t index,
                                                 raptor_steer_outcome* out);
RAPTOR_API raptor_status raptor_steering_summary(const raptor_steering* run,
                                                 raptor_steer_summary* out);
/// Key=value report at `report_path` and per-pair CSV at `csv_path`.
RAPTOR_API raptor_status raptor_steering_write(const raptor_steering* run, const char* report_path,
                                               const char* csv_path);
RAPTOR_API void raptor_steering_free(raptor_steering* run);

/* ---- theory ------------------------------------------------------------ */

typedef struct raptor_theory_options {
    double tol;
    size_t quad_nodes;
    int max_iter;
    int explore_all;
    int has_init;
    double init[3]; /* alpha, sigma, gamma */
} raptor_theory_options;

RAPTOR_API void raptor_theory_options_default(raptor_theory_options* opts);

RAPTOR_API raptor_status raptor_logistic_prox(double u, double gamma, double* eta);
RAPTOR_API raptor_status raptor_accuracy_from_margin(double margin, double kappa, double* acc);
RAPTOR_API raptor_status raptor_bayes_ceiling(double kappa, double* acc);

RAPTOR_API raptor_status raptor_theory_solve(double delta, double lambda, double kappa,
                                             const raptor_theory_options* opts,
                                             raptor_fixed_point** out);

RAPTOR_API void raptor_fixed_point_values(const raptor_fixed_point* fp, double* alpha_bar,
                                          double* sigma_bar, double* gamma_bar,
                                          double* residual_max);
RAPTOR_API double raptor_fixed_point_accuracy(const raptor_fixed_point* fp);
RAPTOR_API raptor_status raptor_fixed_point_stability(const raptor_fixed_point* fp,
                                                      double* stability, double* alignment);
/// Number of distinct solutions found, the reported one included.
RAPTOR_API size_t raptor_fixed_point_solutions(const raptor_fixed_point* fp);
RAPTOR_API raptor_status raptor_fixed_point_write(const raptor_fixed_point* fp, const char* path);
RAPTOR_API void raptor_fixed_point_free(raptor_fixed_point* fp);

/* ---- theory vs empirics sweeps ----------------------------------------- */

typedef struct raptor_sweep_options {
    size_t p;
    size_t reps;
    uint64_t seed;
    size_t jobs;
    size_t quad_nodes;
} raptor_sweep_options;

RAPTOR_API void raptor_sweep_options_default(raptor_sweep_options* opts);

/// Grid point i is (deltas[i], lambdas[i], kappas[i]).
RAPTOR_API raptor_status raptor_sweep_run(const double* deltas, const double* lambdas,
                                          const double* kappas, size_t n_points,
                                          const raptor_sweep_options* opts, raptor_sweep** out);

RAPTOR_API size_t raptor_sweep_rows(const raptor_sweep* sweep);
RAPTOR_API size_t raptor_sweep_failed_rows(const raptor_sweep* sweep);
/// NaN when a correlation is undefined.
RAPTOR_API void raptor_sweep_correlations(const raptor_sweep* sweep, double* spearman,
                                          double* pearson);
RAPTOR_API raptor_status raptor_sweep_write_csv(const raptor_sweep* sweep, const char* path);
RAPTOR_API raptor_status raptor_sweep_write_summary(const raptor_sweep* sweep, const char* path);
RAPTOR_API void raptor_sweep_free(raptor_sweep* sweep);

#ifdef __cplusplus
}
#endif

#endif
