#ifndef CCOVOXEL_H
#define CCOVOXEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(CCV_BUILDING_LIBRARY)
#define CCV_API __attribute__((visibility("default")))
#else
#define CCV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status. On failure a message is kept per
 * thread and can be read with ccv_last_error() until the next failing call. */
typedef enum ccv_status {
  CCV_OK = 0,
  CCV_ERR_INVALID_ARGUMENT = 1,
  CCV_ERR_INVALID_SPEC = 2,
  CCV_ERR_OUT_OF_BOUNDS = 3,
  CCV_ERR_DIMENSION_MISMATCH = 4,
  CCV_ERR_DOMAIN = 5,
  CCV_ERR_DEGENERATE_FIT = 6,
  CCV_ERR_TRAINING_FAILURE = 7,
  CCV_ERR_SEARCH_FAILURE = 8,
  CCV_ERR_INVALID_QUERY = 9,
  CCV_ERR_REFINEMENT_FAILURE = 10,
  CCV_ERR_IO = 11,
  CCV_ERR_PARSE = 12,
  CCV_ERR_NULL_POINTER = 13,
  CCV_ERR_INTERNAL = 14
} ccv_status;

CCV_API const char* ccv_status_name(ccv_status status);
CCV_API const char* ccv_last_error(void);
CCV_API const char* ccv_version(void);

/* 0 quiet, 1 warnings, 2 info. */
CCV_API ccv_status ccv_set_log_level(int level);

/* ---- Occupancy grids and distance fields ---- */

typedef struct ccv_grid ccv_grid;
typedef struct ccv_field ccv_field;

CCV_API ccv_status ccv_grid_create(const int dims[3], double resolution, const double origin[3], ccv_grid** out);
/* archetype: "box_cylinder", "wall_grid" or "custom" (empty). */
CCV_API ccv_status ccv_grid_generate(const char* archetype, const double extent[3], double resolution,
                                     double density, uint64_t seed, ccv_grid** out);
CCV_API ccv_status ccv_grid_dims(const ccv_grid* grid, int dims[3]);
CCV_API ccv_status ccv_grid_get(const ccv_grid* grid, const int voxel[3], int* occupied);
CCV_API ccv_status ccv_grid_set(ccv_grid* grid, const int voxel[3], int occupied);
CCV_API ccv_status ccv_grid_occupied_count(const ccv_grid* grid, size_t* count);
CCV_API ccv_status ccv_grid_corrupt(const ccv_grid* grid, double sigma, uint64_t seed, ccv_grid** out);
CCV_API ccv_status ccv_grid_save(const ccv_grid* grid, const char* path);
CCV_API ccv_status ccv_grid_load(const char* path, ccv_grid** out);
CCV_API void ccv_grid_free(ccv_grid* grid);

CCV_API ccv_status ccv_field_compute(const ccv_grid* grid, double clamp, ccv_field** out);
CCV_API ccv_status ccv_field_at(const ccv_field* field, const int voxel[3], double* distance);
CCV_API ccv_status ccv_field_query(const ccv_field* field, const double point[3], double* distance);
CCV_API void ccv_field_free(ccv_field* field);

/* ---- MMD ---- */

/* Squared MMD between uniform weights on v[0..n) and the Dirac at zero, RBF bandwidth sigma. */
CCV_API ccv_status ccv_mmd_to_dirac(const double* v, size_t n, double sigma, double* out);
/* Weighted matrix form; alpha and beta each sum to one. */
CCV_API ccv_status ccv_mmd_squared(const double* v, const double* alpha, const double* beta, size_t n, double sigma,
                                   double* out);

/* ---- Autoencoder ---- */

typedef struct ccv_encoder ccv_encoder;

CCV_API ccv_status ccv_encoder_load(const char* path, ccv_encoder** out);
CCV_API ccv_status ccv_encoder_dims(const ccv_encoder* encoder, int* input_dim, int* latent_dim);
CCV_API ccv_status ccv_encoder_encode(const ccv_encoder* encoder, const double* v, size_t m, double* z, size_t p);
CCV_API void ccv_encoder_free(ccv_encoder* encoder);

/* ---- Scenarios and experiments ---- */

typedef struct ccv_scenario ccv_scenario;

CCV_API ccv_status ccv_scenario_load(const char* path, ccv_scenario** out);
CCV_API ccv_status ccv_scenario_parse(const char* text, const char* base_dir, ccv_scenario** out);
/* Empty string for a NULL scenario. */
CCV_API const char* ccv_scenario_name(const ccv_scenario* scenario);
CCV_API ccv_status ccv_scenario_seed(const ccv_scenario* scenario, uint64_t* seed);
CCV_API ccv_status ccv_scenario_set_seed(ccv_scenario* scenario, uint64_t seed);
CCV_API ccv_status ccv_scenario_trials(const ccv_scenario* scenario, int* trials);
CCV_API ccv_status ccv_scenario_set_trials(ccv_scenario* scenario, int trials);
CCV_API void ccv_scenario_free(ccv_scenario* scenario);

typedef struct ccv_run_summary {
  int planned;
  int goal_reached;
  int collision;
  int success;
  double smoothness;
  double path_length;
  double min_clearance;
  double duration;
  double final_mmd;
  uint64_t expansions;
  double frontend_seconds;
  double backend_seconds;
} ccv_run_summary;

/* Plans one trial with the named baseline ("proposed", "deterministic",
 * "bounding_volume"). Writes the plan artifacts into out_dir when it is not
 * NULL. A planner failure is reported in the summary, not as an error. */
CCV_API ccv_status ccv_plan(const ccv_scenario* scenario, const char* baseline, int trial, const char* out_dir,
                            ccv_run_summary* summary);

typedef struct ccv_baseline_summary {
  char baseline[32];
  int trials;
  int planned;
  int successes;
  int collisions;
  double success_rate;
  double collision_rate;
  double mean_smoothness;
  double mean_path_length;
  double mean_min_clearance;
  double mean_seconds;
  double std_seconds;
} ccv_baseline_summary;

typedef struct ccv_report ccv_report;

/* Runs every trial of the scenario for each baseline; a NULL list or zero
 * count selects all three. frontend_only scores
 * the search path without backend refinement. Writes <prefix>*.csv/jsonl
 * into out_dir when it is not NULL. */
CCV_API ccv_status ccv_bench(const ccv_scenario* scenario, const char* const* baselines, size_t baseline_count,
                             int workers, int frontend_only, const char* out_dir, const char* prefix,
                             ccv_report** out);
CCV_API ccv_status ccv_report_size(const ccv_report* report, size_t* baselines);
CCV_API ccv_status ccv_report_summary(const ccv_report* report, size_t index, ccv_baseline_summary* out);
/* Fixed-width text table; owned by the report. */
CCV_API const char* ccv_report_table(const ccv_report* report);
CCV_API void ccv_report_free(ccv_report* report);

typedef struct ccv_mmd_ablation {
  int vectors;
  int samples;
  int latent_dim;
  double full_median_seconds;
  double latent_median_seconds;
  double speedup;
  double rank_correlation;
  double identity_max_error;
} ccv_mmd_ablation;

/* Compares full-sample MMD with the latent path on vectors drawn from the
 * scenario. encoder may be NULL, in which case one is trained with
 * latent_dim outputs. */
CCV_API ccv_status ccv_ablate_mmd(const ccv_scenario* scenario, const ccv_encoder* encoder, int vectors,
                                  int latent_dim, const char* out_dir, ccv_mmd_ablation* out);

typedef struct ccv_train_summary {
  int vectors;
  int input_dim;
  int latent_dim;
  int epochs;
  double initial_loss;
  double final_loss;
  double final_step_size;
} ccv_train_summary;

/* Trains an autoencoder on violation vectors from the scenario and saves it
 * to model_path. */
CCV_API ccv_status ccv_train_encoder(const ccv_scenario* scenario, int vectors, int latent_dim, int epochs,
                                     double step_size, const char* model_path, ccv_train_summary* out);

#ifdef __cplusplus
}
#endif

#endif
