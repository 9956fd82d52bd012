/* anchorloc: multi-camera pedestrian localization engine, C API.
 *
 * All functions returning anchorloc_status yield ANCHORLOC_OK on success.
 * On failure, anchorloc_last_error() returns a thread-local message that
 * stays valid until the next failing call on the same thread. Out-params are
 * untouched on failure. Handles are freed exactly once with their _free
 * function; freeing NULL is a no-op.
 */
#ifndef ANCHORLOC_H
#define ANCHORLOC_H

#include <stdint.h>

#if defined(_WIN32)
#define ANCHORLOC_API __declspec(dllexport)
#else
#define ANCHORLOC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t anchorloc_status;

#define ANCHORLOC_OK 0
#define ANCHORLOC_ERR_INVALID_ARGUMENT 1
#define ANCHORLOC_ERR_POINT_BEHIND_CAMERA 2
#define ANCHORLOC_ERR_NO_CONVERGENCE 3
#define ANCHORLOC_ERR_DEGENERATE_HOMOGRAPHY 4
#define ANCHORLOC_ERR_SINGULAR_SYSTEM 5
#define ANCHORLOC_ERR_EMPTY_ANCHOR_LIST 6
#define ANCHORLOC_ERR_NO_VISIBLE_CAMERA 7
#define ANCHORLOC_ERR_MISSING_WEIGHTS 8
#define ANCHORLOC_ERR_LENGTH_MISMATCH 9
#define ANCHORLOC_ERR_NO_VALID_PROBES 10
#define ANCHORLOC_ERR_FOV_SAMPLING_EXHAUSTED 11
#define ANCHORLOC_ERR_IO 12
#define ANCHORLOC_ERR_PARSE 13
#define ANCHORLOC_ERR_INTERNAL 14

ANCHORLOC_API const char* anchorloc_version(void);
ANCHORLOC_API const char* anchorloc_last_error(void);
ANCHORLOC_API const char* anchorloc_status_name(anchorloc_status status);

/* ---- pipeline entry points (file based) ---- */

ANCHORLOC_API anchorloc_status anchorloc_run_simulate(const char* scene_spec_path,
                                                      const char* out_dir);

ANCHORLOC_API anchorloc_status anchorloc_run_perturb(const char* cameras_path,
                                                     const char* perturbation_path,
                                                     uint64_t seed,
                                                     const char* out_path);

/* out_dir may be NULL to use the run config's out_dir. */
ANCHORLOC_API anchorloc_status anchorloc_run_localize(const char* run_config_path,
                                                      const char* out_dir);

/* observations_jsonl may be NULL; without it every frame is treated as
 * multi-camera for the distance metric. */
ANCHORLOC_API anchorloc_status anchorloc_run_evaluate(const char* estimates_csv,
                                                      const char* truth_csv,
                                                      const char* initials_csv,
                                                      const char* observations_jsonl,
                                                      const char* out_json);

ANCHORLOC_API anchorloc_status anchorloc_run_sweep(const char* sweep_spec_path,
                                                   const char* out_dir,
                                                   int32_t jobs,
                                                   int32_t dry_run);

/* ---- engine handles ---- */

typedef struct anchorloc_cameras anchorloc_cameras;
typedef struct anchorloc_anchors anchorloc_anchors;

ANCHORLOC_API anchorloc_status anchorloc_cameras_load(const char* path,
                                                      anchorloc_cameras** out);
ANCHORLOC_API anchorloc_status anchorloc_cameras_parse(const char* json_text,
                                                       anchorloc_cameras** out);
ANCHORLOC_API int32_t anchorloc_cameras_count(const anchorloc_cameras* cameras);
ANCHORLOC_API void anchorloc_cameras_free(anchorloc_cameras* cameras);

ANCHORLOC_API anchorloc_status anchorloc_anchors_load(const char* path,
                                                      anchorloc_anchors** out);
ANCHORLOC_API int32_t anchorloc_anchors_count(const anchorloc_anchors* anchors);
ANCHORLOC_API void anchorloc_anchors_free(anchorloc_anchors* anchors);

ANCHORLOC_API anchorloc_status anchorloc_project(const anchorloc_cameras* cameras,
                                                 int32_t camera_id,
                                                 const double xyz[3],
                                                 double uv_out[2]);

/* 1 visible, 0 not visible, negative status on unknown camera id. */
ANCHORLOC_API int32_t anchorloc_is_visible(const anchorloc_cameras* cameras,
                                           int32_t camera_id,
                                           const double xyz[3]);

/* ---- single frame localization ---- */

#define ANCHORLOC_MODE_NOMINAL 0
#define ANCHORLOC_MODE_ANCHOR 1

#define ANCHORLOC_REP_HEAD 0
#define ANCHORLOC_REP_ANKLE 1

typedef struct {
  int32_t camera_id;
  double u;
  double v;
} anchorloc_pixel_obs;

typedef struct {
  int32_t mode;            /* ANCHORLOC_MODE_* */
  int32_t representative;  /* ANCHORLOC_REP_* */
  double plane_height;     /* init plane; also the pinned height when only
                              one camera observes the frame */
  double lambda;
  int32_t anchor_count_limit; /* 0 keeps all anchors */
  int32_t max_iters;
  double step_tol;
  double grad_tol;
  double damping_init;
  double damping_up;
  double damping_down;
} anchorloc_solve_options;

ANCHORLOC_API void anchorloc_solve_options_init(anchorloc_solve_options* options);

typedef struct {
  double x;
  double y;
  double z;
  int32_t converged;
  int32_t iterations;
  double objective;
  int32_t cameras_used;
} anchorloc_result;

/* anchors may be NULL in nominal mode. */
ANCHORLOC_API anchorloc_status anchorloc_localize_frame(
    const anchorloc_cameras* cameras,
    const anchorloc_anchors* anchors,
    const anchorloc_pixel_obs* observations,
    int32_t n_observations,
    const anchorloc_solve_options* options,
    anchorloc_result* out);

#ifdef __cplusplus
}
#endif

#endif /* ANCHORLOC_H */
