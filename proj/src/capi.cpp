#include "anchorloc/anchorloc.h"

#include "anchorloc/anchor_weights.hpp"
#include "anchorloc/initializer.hpp"
#include "anchorloc/io.hpp"
#include "anchorloc/localizer.hpp"
#include "anchorloc/pipeline.hpp"
#include "anchorloc/sweep.hpp"
#include "anchorloc/version.hpp"

#include <exception>
#include <functional>
#include <memory>
#include <string>
#include <vector>

using namespace anchorloc;

namespace {

thread_local std::string g_last_error;

anchorloc_status set_error(ErrorCode code, const std::string& message) {
  g_last_error = message;
  return static_cast<anchorloc_status>(code);
}

// every entry point funnels its exceptions through here
anchorloc_status guard(const char* what, const std::function<void()>& body) {
  try {
    body();
    return ANCHORLOC_OK;
  } catch (const Error& e) {
    return set_error(e.code(), std::string(what) + ": " + e.what());
  } catch (const std::exception& e) {
    return set_error(ErrorCode::Internal, std::string(what) + ": " + e.what());
  } catch (...) {
    return set_error(ErrorCode::Internal, std::string(what) + ": unknown failure");
  }
}

anchorloc_status require_arg(bool ok, const char* message) {
  return ok ? ANCHORLOC_OK : set_error(ErrorCode::InvalidArgument, message);
}

}  // namespace

struct anchorloc_cameras {
  std::vector<CameraParams> cameras;
};

struct anchorloc_anchors {
  AnchorSet set;
  int count = 0;
};

extern "C" {

const char* anchorloc_version(void) { return kVersion; }

const char* anchorloc_last_error(void) { return g_last_error.c_str(); }

const char* anchorloc_status_name(anchorloc_status status) {
  return error_code_name(static_cast<ErrorCode>(status));
}

anchorloc_status anchorloc_run_simulate(const char* scene_spec_path, const char* out_dir) {
  if (auto bad = require_arg(scene_spec_path && out_dir, "simulate: NULL path")) return bad;
  return guard("simulate", [&] { cmd_simulate(scene_spec_path, out_dir); });
}

anchorloc_status anchorloc_run_perturb(const char* cameras_path,
                                       const char* perturbation_path, uint64_t seed,
                                       const char* out_path) {
  if (auto bad = require_arg(cameras_path && perturbation_path && out_path,
                             "perturb: NULL path"))
    return bad;
  return guard("perturb",
               [&] { cmd_perturb(cameras_path, perturbation_path, seed, out_path); });
}

anchorloc_status anchorloc_run_localize(const char* run_config_path, const char* out_dir) {
  if (auto bad = require_arg(run_config_path != nullptr, "localize: NULL config path"))
    return bad;
  return guard("localize",
               [&] { cmd_localize(run_config_path, out_dir ? out_dir : ""); });
}

anchorloc_status anchorloc_run_evaluate(const char* estimates_csv, const char* truth_csv,
                                        const char* initials_csv,
                                        const char* observations_jsonl,
                                        const char* out_json) {
  if (auto bad = require_arg(estimates_csv && truth_csv && initials_csv && out_json,
                             "evaluate: NULL path"))
    return bad;
  return guard("evaluate", [&] {
    cmd_evaluate(estimates_csv, truth_csv, initials_csv,
                 observations_jsonl ? observations_jsonl : "", out_json);
  });
}

anchorloc_status anchorloc_run_sweep(const char* sweep_spec_path, const char* out_dir,
                                     int32_t jobs, int32_t dry_run) {
  if (auto bad = require_arg(sweep_spec_path != nullptr, "sweep: NULL spec path")) return bad;
  if (auto bad = require_arg(dry_run != 0 || out_dir != nullptr,
                             "sweep: NULL output directory"))
    return bad;
  return guard("sweep", [&] {
    SweepOptions options;
    options.out_dir = out_dir ? out_dir : "";
    options.jobs = jobs;
    options.dry_run = dry_run != 0;
    run_sweep_file(sweep_spec_path, options);
  });
}

anchorloc_status anchorloc_cameras_load(const char* path, anchorloc_cameras** out) {
  if (auto bad = require_arg(path && out, "cameras_load: NULL argument")) return bad;
  return guard("cameras_load", [&] {
    auto handle = std::make_unique<anchorloc_cameras>();
    handle->cameras = load_cameras_json(path);
    *out = handle.release();
  });
}

anchorloc_status anchorloc_cameras_parse(const char* json_text, anchorloc_cameras** out) {
  if (auto bad = require_arg(json_text && out, "cameras_parse: NULL argument")) return bad;
  return guard("cameras_parse", [&] {
    auto handle = std::make_unique<anchorloc_cameras>();
    handle->cameras = parse_cameras_json(json_text, "<memory>");
    *out = handle.release();
  });
}

int32_t anchorloc_cameras_count(const anchorloc_cameras* cameras) {
  return cameras == nullptr ? 0 : static_cast<int32_t>(cameras->cameras.size());
}

void anchorloc_cameras_free(anchorloc_cameras* cameras) { delete cameras; }

anchorloc_status anchorloc_anchors_load(const char* path, anchorloc_anchors** out) {
  if (auto bad = require_arg(path && out, "anchors_load: NULL argument")) return bad;
  return guard("anchors_load", [&] {
    auto handle = std::make_unique<anchorloc_anchors>();
    std::vector<Anchor> anchors = load_anchors_csv(path);
    handle->count = static_cast<int>(anchors.size());
    handle->set = AnchorSet(anchors);
    *out = handle.release();
  });
}

int32_t anchorloc_anchors_count(const anchorloc_anchors* anchors) {
  return anchors == nullptr ? 0 : anchors->count;
}

void anchorloc_anchors_free(anchorloc_anchors* anchors) { delete anchors; }

anchorloc_status anchorloc_project(const anchorloc_cameras* cameras, int32_t camera_id,
                                   const double xyz[3], double uv_out[2]) {
  if (auto bad = require_arg(cameras && xyz && uv_out, "project: NULL argument")) return bad;
  return guard("project", [&] {
    const CameraParams* camera = find_camera(cameras->cameras, camera_id);
    if (camera == nullptr)
      throw InvalidArgument("unknown camera id " + std::to_string(camera_id));
    Pixel2D pixel = project(Position3D(xyz[0], xyz[1], xyz[2]), *camera);
    uv_out[0] = pixel.x();
    uv_out[1] = pixel.y();
  });
}

int32_t anchorloc_is_visible(const anchorloc_cameras* cameras, int32_t camera_id,
                             const double xyz[3]) {
  if (cameras == nullptr || xyz == nullptr)
    return -set_error(ErrorCode::InvalidArgument, "is_visible: NULL argument");
  const CameraParams* camera = find_camera(cameras->cameras, camera_id);
  if (camera == nullptr)
    return -set_error(ErrorCode::InvalidArgument,
                      "is_visible: unknown camera id " + std::to_string(camera_id));
  return is_visible(Position3D(xyz[0], xyz[1], xyz[2]), *camera) ? 1 : 0;
}

void anchorloc_solve_options_init(anchorloc_solve_options* options) {
  if (options == nullptr) return;
  SolverConfig defaults;
  options->mode = ANCHORLOC_MODE_ANCHOR;
  options->representative = ANCHORLOC_REP_ANKLE;
  options->plane_height = 0.0;
  options->lambda = kDefaultWeightLambda;
  options->anchor_count_limit = 0;
  options->max_iters = defaults.max_iters;
  options->step_tol = defaults.step_tol;
  options->grad_tol = defaults.grad_tol;
  options->damping_init = defaults.damping_init;
  options->damping_up = defaults.damping_up;
  options->damping_down = defaults.damping_down;
}

anchorloc_status anchorloc_localize_frame(const anchorloc_cameras* cameras,
                                          const anchorloc_anchors* anchors,
                                          const anchorloc_pixel_obs* observations,
                                          int32_t n_observations,
                                          const anchorloc_solve_options* options,
                                          anchorloc_result* out) {
  if (auto bad = require_arg(cameras && observations && options && out,
                             "localize_frame: NULL argument"))
    return bad;
  if (auto bad = require_arg(n_observations > 0, "localize_frame: no observations"))
    return bad;
  if (auto bad = require_arg(
          options->mode == ANCHORLOC_MODE_NOMINAL || options->mode == ANCHORLOC_MODE_ANCHOR,
          "localize_frame: bad mode"))
    return bad;
  if (auto bad = require_arg(options->mode == ANCHORLOC_MODE_NOMINAL || anchors != nullptr,
                             "localize_frame: anchor mode without anchors"))
    return bad;

  return guard("localize_frame", [&] {
    FrameObservations frame;
    frame.frame_index = 0;
    frame.target_id = 0;
    frame.representative = options->representative == ANCHORLOC_REP_HEAD
                               ? Representative::Head
                               : Representative::Ankle;
    for (int32_t i = 0; i < n_observations; ++i) {
      ObservationEntry entry;
      entry.camera_id = observations[i].camera_id;
      entry.visible = true;
      entry.pixel = Pixel2D(observations[i].u, observations[i].v);
      frame.entries.push_back(entry);
    }

    SolverConfig solver;
    solver.max_iters = options->max_iters;
    solver.step_tol = options->step_tol;
    solver.grad_tol = options->grad_tol;
    solver.damping_init = options->damping_init;
    solver.damping_up = options->damping_up;
    solver.damping_down = options->damping_down;
    solver.fixed_height = options->plane_height;

    const Mode mode =
        options->mode == ANCHORLOC_MODE_ANCHOR ? Mode::Anchor : Mode::Nominal;
    AnchorSet anchor_set;
    if (anchors != nullptr) anchor_set = anchors->set.limited(options->anchor_count_limit);

    InitialEstimate init =
        initial_estimate(frame, cameras->cameras, options->plane_height);
    LocalizationResult result = solve_frame(frame, cameras->cameras, anchor_set, mode,
                                            init.position, solver, options->lambda);
    out->x = result.position.x();
    out->y = result.position.y();
    out->z = result.position.z();
    out->converged = result.converged ? 1 : 0;
    out->iterations = result.iterations;
    out->objective = result.final_objective;
    out->cameras_used = static_cast<int32_t>(result.per_camera_residuals.size());
  });
}

}  // extern "C"
