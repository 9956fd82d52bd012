#include "anchorloc/pipeline.hpp"

#include "anchorloc/initializer.hpp"
#include "anchorloc/logging.hpp"
#include "anchorloc/version.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace anchorloc {

namespace fs = std::filesystem;

namespace {

Intrinsics parse_intrinsics(const ordered_json& obj, const Eigen::Vector2i& image_size,
                           const std::string& path) {
  Intrinsics in;
  in.fx = require_number(require_key(obj, "fx", path), path + "/fx");
  in.fy = require_number(require_key(obj, "fy", path), path + "/fy");
  in.cx = number_or(obj, "cx", image_size.x() / 2.0, path);
  in.cy = number_or(obj, "cy", image_size.y() / 2.0, path);
  return in;
}

Distortion parse_distortion_array(const ordered_json& arr, const std::string& path) {
  if (!arr.is_array() || arr.size() != 5)
    throw ParseError(path + ": expected [k1, k2, p1, p2, k3]");
  Distortion d;
  d.k1 = require_number(arr[0], path + "/0");
  d.k2 = require_number(arr[1], path + "/1");
  d.p1 = require_number(arr[2], path + "/2");
  d.p2 = require_number(arr[3], path + "/3");
  d.k3 = require_number(arr[4], path + "/4");
  return d;
}

PerturbationSpec parse_perturbation(const ordered_json& obj, const std::string& path) {
  PerturbationSpec spec;
  spec.rx_deg = number_or(obj, "rx_deg", 0.0, path);
  spec.ry_deg = number_or(obj, "ry_deg", 0.0, path);
  spec.t_m = number_or(obj, "t_m", 0.0, path);
  spec.d_rel = number_or(obj, "d_rel", 0.0, path);
  spec.sign_mode = sign_mode_from_string(string_or(obj, "sign_mode", "BOTH", path));
  return spec;
}

std::vector<CameraParams> parse_camera_layout(const ordered_json& layout,
                                              const Eigen::Vector2d& extent,
                                              const std::string& path) {
  const std::string type = require_string(require_key(layout, "type", path), path + "/type");
  if (type != "perimeter")
    throw ParseError(path + "/type: unknown layout '" + type + "'");
  const int count = require_int(require_key(layout, "count", path), path + "/count");
  const double height =
      require_number(require_key(layout, "height", path), path + "/height");

  const ordered_json& size = require_key(layout, "image_size", path);
  if (!size.is_array() || size.size() != 2)
    throw ParseError(path + "/image_size: expected [width, height]");
  Eigen::Vector2i image_size(require_int(size[0], path + "/image_size/0"),
                             require_int(size[1], path + "/image_size/1"));

  Intrinsics intrinsics = parse_intrinsics(
      require_key(layout, "intrinsics", path), image_size, path + "/intrinsics");
  Distortion distortion;
  if (layout.contains("distortion"))
    distortion = parse_distortion_array(layout["distortion"], path + "/distortion");

  return make_perimeter_cameras(extent, count, height, intrinsics, image_size, distortion,
                                number_or(layout, "look_at_height", 1.0, path),
                                number_or(layout, "inset", 0.0, path));
}

std::string resolve_relative(const std::string& base_file, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_file).parent_path() / p).string();
}

ordered_json perturbation_to_json(const PerturbationSpec& spec) {
  return ordered_json{{"rx_deg", spec.rx_deg},
                      {"ry_deg", spec.ry_deg},
                      {"t_m", spec.t_m},
                      {"d_rel", spec.d_rel},
                      {"sign_mode", to_string(spec.sign_mode)}};
}

}  // namespace

SimulationSpec parse_simulation_spec(const std::string& text, const std::string& origin) {
  ordered_json root = parse_json_text(text, origin);
  SimulationSpec spec;

  const ordered_json& extent = require_key(root, "extent", origin);
  if (!extent.is_array() || extent.size() != 2)
    throw ParseError(origin + "/extent: expected [length, width]");
  spec.scene.extent.x() = require_number(extent[0], origin + "/extent/0");
  spec.scene.extent.y() = require_number(extent[1], origin + "/extent/1");

  spec.scene.rng_seed =
      static_cast<std::uint64_t>(int_or(root, "rng_seed", 0, origin));
  spec.scene.anchors_per_camera = int_or(root, "anchors_per_camera", 10, origin);

  if (root.contains("cameras")) {
    spec.scene.cameras = parse_cameras_json(root["cameras"].dump(), origin + "/cameras");
  } else if (root.contains("camera_layout")) {
    spec.scene.cameras = parse_camera_layout(root["camera_layout"], spec.scene.extent,
                                             origin + "/camera_layout");
  } else {
    throw ParseError(origin + ": needs either 'cameras' or 'camera_layout'");
  }

  const ordered_json& sim = require_key(root, "simulation", origin);
  const std::string sim_path = origin + "/simulation";
  spec.n_targets = int_or(sim, "n_targets", 1, sim_path);
  spec.n_frames = require_int(require_key(sim, "n_frames", sim_path), sim_path + "/n_frames");
  spec.step_sigma = number_or(sim, "step_sigma", 0.05, sim_path);
  spec.representative =
      representative_from_string(string_or(sim, "representative", "ANKLE", sim_path));
  spec.sim_options.height_min = number_or(sim, "height_min", 1.5, sim_path);
  spec.sim_options.height_max = number_or(sim, "height_max", 1.9, sim_path);
  spec.sim_options.anchor_height_max = number_or(sim, "anchor_height_max", 2.5, sim_path);
  spec.sim_options.max_rejects = int_or(sim, "max_rejects", 100000, sim_path);

  if (root.contains("noise")) {
    const std::string noise_path = origin + "/noise";
    spec.noise.pixel_sigma = number_or(root["noise"], "pixel_sigma", 0.0, noise_path);
    spec.noise.anchor_pixel_sigma =
        number_or(root["noise"], "anchor_pixel_sigma", 0.0, noise_path);
  }
  if (root.contains("perturbation"))
    spec.perturbation = parse_perturbation(root["perturbation"], origin + "/perturbation");
  return spec;
}

SimulationSpec load_simulation_spec(const std::string& path) {
  return parse_simulation_spec(read_text_file(path), path);
}

double TargetHeights::height_for(int target_id) const {
  auto it = by_target.find(target_id);
  return it == by_target.end() ? default_height : it->second;
}

void cmd_simulate(const std::string& scene_spec_path, const std::string& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  SimulationSpec spec = load_simulation_spec(scene_spec_path);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<GroundTruthTrajectory> trajectories = simulate_trajectories(
      spec.scene, spec.n_targets, spec.n_frames, spec.step_sigma, spec.sim_options);

  std::vector<Anchor> anchors;
  for (const CameraParams& camera : spec.scene.cameras) {
    std::vector<Anchor> sampled = sample_anchors(
        spec.scene, camera, spec.scene.anchors_per_camera, spec.noise.anchor_pixel_sigma,
        anchor_stream_seed(spec.scene.rng_seed, camera.id), spec.sim_options);
    anchors.insert(anchors.end(), sampled.begin(), sampled.end());
  }

  std::vector<FrameObservations> observations =
      render_observations(trajectories, spec.scene.cameras, spec.noise,
                          spec.representative, spec.scene.rng_seed);

  save_cameras_json((out / "cameras_true.json").string(), spec.scene.cameras);
  if (spec.perturbation) {
    save_cameras_json(
        (out / "cameras_perturbed.json").string(),
        perturb_cameras(spec.scene.cameras, *spec.perturbation, spec.scene.rng_seed));
  }
  save_anchors_csv((out / "anchors.csv").string(), anchors);

  std::vector<TrajectoryRecord> truth;
  truth.reserve(trajectories.size() * spec.n_frames);
  for (int t = 0; t < spec.n_frames; ++t) {
    for (const auto& traj : trajectories) {
      TrajectoryRecord rec;
      rec.frame_index = t;
      rec.target_id = traj.target_id;
      rec.position = representative_point(traj, t, spec.representative);
      truth.push_back(rec);
    }
  }
  save_trajectories_csv((out / "trajectories.csv").string(), truth);
  save_observations_jsonl((out / "observations.jsonl").string(), observations);

  ordered_json heights = ordered_json::object();
  for (const auto& traj : trajectories)
    heights[std::to_string(traj.target_id)] = traj.height;
  ordered_json manifest{
      {"version", kVersion},
      {"rng_seed", spec.scene.rng_seed},
      {"extent", {spec.scene.extent.x(), spec.scene.extent.y()}},
      {"n_cameras", spec.scene.cameras.size()},
      {"anchors_per_camera", spec.scene.anchors_per_camera},
      {"n_targets", spec.n_targets},
      {"n_frames", spec.n_frames},
      {"step_sigma", spec.step_sigma},
      {"representative", to_string(spec.representative)},
      {"target_heights", std::move(heights)},
      {"noise",
       {{"pixel_sigma", spec.noise.pixel_sigma},
        {"anchor_pixel_sigma", spec.noise.anchor_pixel_sigma}}},
      {"perturbation",
       spec.perturbation ? perturbation_to_json(*spec.perturbation) : ordered_json(nullptr)},
      {"files",
       {{"cameras_true", "cameras_true.json"},
        {"cameras_perturbed", spec.perturbation ? ordered_json("cameras_perturbed.json")
                                                : ordered_json(nullptr)},
        {"anchors", "anchors.csv"},
        {"trajectories", "trajectories.csv"},
        {"observations", "observations.jsonl"}}}};
  write_text_file((out / "manifest.json").string(), manifest.dump(2) + "\n");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  log::info("simulate: " + std::to_string(observations.size()) + " frame rows, " +
            std::to_string(anchors.size()) + " anchors -> " + out_dir + " (" +
            format_g9(elapsed) + " s)");
}

void cmd_perturb(const std::string& cameras_path, const std::string& perturbation_path,
                 std::uint64_t seed, const std::string& out_path) {
  std::vector<CameraParams> cameras = load_cameras_json(cameras_path);
  ordered_json root = parse_json_text(read_text_file(perturbation_path), perturbation_path);
  PerturbationSpec spec = parse_perturbation(root, perturbation_path);
  save_cameras_json(out_path, perturb_cameras(cameras, spec, seed));
  log::info("perturb: " + std::to_string(cameras.size()) + " cameras -> " + out_path);
}

RunConfig load_run_config(const std::string& path) {
  ordered_json root = parse_json_text(read_text_file(path), path);
  RunConfig config;
  config.cameras_path =
      resolve_relative(path, require_string(require_key(root, "cameras", path), path + "/cameras"));
  config.observations_path = resolve_relative(
      path, require_string(require_key(root, "observations", path), path + "/observations"));
  config.mode = mode_from_string(string_or(root, "mode", "ANCHOR", path));

  if (root.contains("anchors"))
    config.anchors_path = resolve_relative(path, require_string(root["anchors"], path + "/anchors"));
  else if (config.mode == Mode::Anchor)
    throw ParseError(path + ": ANCHOR mode requires an 'anchors' file");

  config.anchor_limit = int_or(root, "anchor_limit", 0, path);
  config.lambda = number_or(root, "lambda", kDefaultWeightLambda, path);
  config.smoothing.batch_size = int_or(root, "batch_size", 1, path);
  config.smoothing.rho = number_or(root, "rho", 0.0, path);
  if (root.contains("solver"))
    config.solver = parse_solver_json(root["solver"], path + "/solver");

  config.heights.default_height = number_or(root, "target_height", 1.7, path);
  if (root.contains("target_heights")) {
    const ordered_json& heights = root["target_heights"];
    if (!heights.is_object()) throw ParseError(path + "/target_heights: expected an object");
    for (auto it = heights.begin(); it != heights.end(); ++it)
      config.heights.by_target[std::stoi(it.key())] =
          require_number(it.value(), path + "/target_heights/" + it.key());
  }
  if (root.contains("manifest")) {
    // pull simulated target heights so HEAD runs use the true plane
    const std::string manifest_path =
        resolve_relative(path, require_string(root["manifest"], path + "/manifest"));
    ordered_json manifest = parse_json_text(read_text_file(manifest_path), manifest_path);
    if (manifest.contains("target_heights")) {
      for (auto it = manifest["target_heights"].begin();
           it != manifest["target_heights"].end(); ++it)
        config.heights.by_target[std::stoi(it.key())] =
            require_number(it.value(), manifest_path + "/target_heights/" + it.key());
    }
  }
  config.out_dir = resolve_relative(path, string_or(root, "out_dir", "out", path));
  return config;
}

LocalizeOutput localize_dataset(const Dataset& dataset, const LocalizeSettings& settings) {
  const std::vector<CameraParams>& solve_cams = dataset.cameras;
  const std::vector<CameraParams>& init_cams =
      dataset.init_cameras.empty() ? dataset.cameras : dataset.init_cameras;
  const AnchorSet anchors = dataset.anchors.limited(settings.anchor_limit);

  // group per target, keeping the original row order for output
  std::map<int, std::vector<const FrameObservations*>> by_target;
  std::set<std::pair<int, int>> seen_keys;
  for (const FrameObservations& frame : dataset.observations) {
    if (!seen_keys.insert({frame.target_id, frame.frame_index}).second)
      throw InvalidArgument("duplicate observation row for target " +
                            std::to_string(frame.target_id) + " frame " +
                            std::to_string(frame.frame_index));
    by_target[frame.target_id].push_back(&frame);
  }

  LocalizeOutput out;
  std::map<std::pair<int, int>, LocalizedFrame> results;

  for (auto& [target_id, frames] : by_target) {
    std::sort(frames.begin(), frames.end(),
              [](const FrameObservations* a, const FrameObservations* b) {
                return a->frame_index < b->frame_index;
              });

    const Representative rep = frames.front()->representative;
    for (const FrameObservations* frame : frames) {
      if (frame->representative != rep)
        throw InvalidArgument("target " + std::to_string(target_id) +
                              " mixes representatives across frames");
    }
    const double plane_height =
        rep == Representative::Head ? settings.heights.height_for(target_id) : 0.0;
    SolverConfig solver = settings.solver;
    solver.fixed_height = plane_height;

    // initialize every frame; frames nobody sees are skipped
    std::vector<const FrameObservations*> usable;
    std::vector<Position3D> inits;
    for (const FrameObservations* frame : frames) {
      try {
        InitialEstimate init =
            initial_estimate(*frame, init_cams, plane_height, settings.camera_options);
        usable.push_back(frame);
        inits.push_back(init.position);
      } catch (const NoVisibleCamera&) {
        ++out.n_skipped_no_visibility;
      }
    }

    const int batch = std::max(1, settings.smoothing.batch_size);
    for (size_t begin = 0; begin < usable.size(); begin += batch) {
      const size_t end = std::min(usable.size(), begin + batch);
      std::vector<FrameObservations> window;
      std::vector<Position3D> window_inits;
      for (size_t i = begin; i < end; ++i) {
        window.push_back(*usable[i]);
        window_inits.push_back(inits[i]);
      }
      std::vector<LocalizationResult> solved =
          solve_batch(window, solve_cams, anchors, settings.mode, window_inits,
                      settings.smoothing, solver, settings.lambda, settings.camera_options);
      for (size_t i = 0; i < solved.size(); ++i) {
        const FrameObservations* frame = usable[begin + i];
        LocalizedFrame row;
        row.frame_index = frame->frame_index;
        row.target_id = frame->target_id;
        row.initial = window_inits[i];
        row.estimate = solved[i].position;
        row.n_visible = frame->visible_count();
        row.converged = solved[i].converged;
        row.iterations = solved[i].iterations;
        row.objective = solved[i].final_objective;
        results[{frame->target_id, frame->frame_index}] = row;

        for (const CameraResidual& res : solved[i].per_camera_residuals) {
          out.residual_sq_sum += res.residual.squaredNorm();
          ++out.residual_count;
          auto& [sq, count] = out.residual_sq_by_camera[res.camera_id];
          sq += res.residual.squaredNorm();
          ++count;
        }
      }
    }
  }

  out.frames.reserve(results.size());
  for (const FrameObservations& frame : dataset.observations) {
    auto it = results.find({frame.target_id, frame.frame_index});
    if (it != results.end()) out.frames.push_back(it->second);
  }
  return out;
}

void cmd_localize(const std::string& run_config_path, const std::string& out_dir_override) {
  const auto started = std::chrono::steady_clock::now();
  RunConfig config = load_run_config(run_config_path);
  if (!out_dir_override.empty()) config.out_dir = out_dir_override;

  Dataset dataset;
  dataset.cameras = load_cameras_json(config.cameras_path);
  if (!config.anchors_path.empty())
    dataset.anchors = AnchorSet(load_anchors_csv(config.anchors_path));
  dataset.observations = load_observations_jsonl(config.observations_path);

  LocalizeSettings settings;
  settings.mode = config.mode;
  settings.anchor_limit = config.anchor_limit;
  settings.lambda = config.lambda;
  settings.smoothing = config.smoothing;
  settings.solver = config.solver;
  settings.heights = config.heights;

  LocalizeOutput result = localize_dataset(dataset, settings);

  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);

  std::vector<EstimateRecord> estimates;
  std::vector<TrajectoryRecord> initials;
  estimates.reserve(result.frames.size());
  initials.reserve(result.frames.size());
  int n_converged = 0;
  long iteration_sum = 0;
  int iteration_max = 0;
  std::map<int, int> visibility_histogram;
  for (const LocalizedFrame& row : result.frames) {
    EstimateRecord est;
    est.frame_index = row.frame_index;
    est.target_id = row.target_id;
    est.position = row.estimate;
    est.converged = row.converged;
    est.objective = row.objective;
    estimates.push_back(est);

    TrajectoryRecord init;
    init.frame_index = row.frame_index;
    init.target_id = row.target_id;
    init.position = row.initial;
    initials.push_back(init);

    if (row.converged) ++n_converged;
    iteration_sum += row.iterations;
    iteration_max = std::max(iteration_max, row.iterations);
    ++visibility_histogram[row.n_visible];
  }
  save_estimates_csv((out / "estimates.csv").string(), estimates);
  save_trajectories_csv((out / "initials.csv").string(), initials);

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  ordered_json visibility = ordered_json::object();
  for (const auto& [n, count] : visibility_histogram)
    visibility[std::to_string(n)] = count;
  ordered_json per_camera = ordered_json::object();
  for (const auto& [camera_id, acc] : result.residual_sq_by_camera) {
    per_camera[std::to_string(camera_id)] =
        acc.second > 0 ? std::sqrt(acc.first / (2.0 * acc.second)) : 0.0;
  }
  const size_t n = result.frames.size();
  ordered_json diagnostics{
      {"version", kVersion},
      {"mode", to_string(config.mode)},
      {"n_frames_in", dataset.observations.size()},
      {"n_localized", n},
      {"n_skipped_no_visibility", result.n_skipped_no_visibility},
      {"convergence",
       {{"n_converged", n_converged},
        {"fraction", n > 0 ? static_cast<double>(n_converged) / n : 0.0},
        {"mean_iterations", n > 0 ? static_cast<double>(iteration_sum) / n : 0.0},
        {"max_iterations", iteration_max}}},
      {"visibility", std::move(visibility)},
      {"residual_rms_px",
       result.residual_count > 0
           ? std::sqrt(result.residual_sq_sum / (2.0 * result.residual_count))
           : 0.0},
      {"per_camera_residual_rms_px", std::move(per_camera)},
      {"config",
       {{"mode", to_string(config.mode)},
        {"anchor_limit", config.anchor_limit},
        {"lambda", config.lambda},
        {"batch_size", config.smoothing.batch_size},
        {"rho", config.smoothing.rho},
        {"solver",
         {{"max_iters", config.solver.max_iters},
          {"step_tol", config.solver.step_tol},
          {"grad_tol", config.solver.grad_tol},
          {"damping_init", config.solver.damping_init},
          {"damping_up", config.solver.damping_up},
          {"damping_down", config.solver.damping_down}}}}},
      {"elapsed_seconds", elapsed}};
  write_text_file((out / "diagnostics.json").string(), diagnostics.dump(2) + "\n");

  log::info("localize: " + std::to_string(n) + " frames in " + to_string(config.mode) +
            " mode -> " + config.out_dir + " (" + format_g9(elapsed) + " s)");
}

std::vector<EvalRow> build_eval_rows(const std::vector<EstimateRecord>& estimates,
                                     const std::vector<TrajectoryRecord>& truth,
                                     const std::vector<TrajectoryRecord>& initials,
                                     const std::vector<FrameObservations>* observations) {
  std::map<std::pair<int, int>, Position3D> truth_by_key;
  for (const TrajectoryRecord& rec : truth)
    truth_by_key[{rec.target_id, rec.frame_index}] = rec.position;
  std::map<std::pair<int, int>, Position3D> init_by_key;
  for (const TrajectoryRecord& rec : initials)
    init_by_key[{rec.target_id, rec.frame_index}] = rec.position;
  std::map<std::pair<int, int>, int> visible_by_key;
  if (observations != nullptr) {
    for (const FrameObservations& frame : *observations)
      visible_by_key[{frame.target_id, frame.frame_index}] = frame.visible_count();
  }

  std::vector<EvalRow> rows;
  rows.reserve(estimates.size());
  for (const EstimateRecord& est : estimates) {
    const auto key = std::make_pair(est.target_id, est.frame_index);
    auto t_it = truth_by_key.find(key);
    if (t_it == truth_by_key.end())
      throw LengthMismatch("no truth row for target " + std::to_string(est.target_id) +
                           " frame " + std::to_string(est.frame_index));
    auto i_it = init_by_key.find(key);
    if (i_it == init_by_key.end())
      throw LengthMismatch("no initial row for target " + std::to_string(est.target_id) +
                           " frame " + std::to_string(est.frame_index));
    EvalRow row;
    row.estimate = est.position;
    row.truth = t_it->second;
    row.initial = i_it->second;
    row.target_id = est.target_id;
    if (observations != nullptr) {
      auto v_it = visible_by_key.find(key);
      row.n_visible = v_it == visible_by_key.end() ? -1 : v_it->second;
    }
    rows.push_back(row);
  }
  return rows;
}

void cmd_evaluate(const std::string& estimates_path, const std::string& truth_path,
                  const std::string& initials_path, const std::string& observations_path,
                  const std::string& out_path) {
  std::vector<EstimateRecord> estimates = load_estimates_csv(estimates_path);
  std::vector<TrajectoryRecord> truth = load_trajectories_csv(truth_path);
  std::vector<TrajectoryRecord> initials = load_trajectories_csv(initials_path);

  std::vector<FrameObservations> observations;
  const bool with_observations = !observations_path.empty();
  if (with_observations) observations = load_observations_jsonl(observations_path);

  std::vector<EvalRow> rows = build_eval_rows(estimates, truth, initials,
                                              with_observations ? &observations : nullptr);
  MetricsReport report = evaluate(rows);
  write_text_file(out_path, metrics_to_json(report).dump(2) + "\n");
  log::info("evaluate: " + std::to_string(report.n_frames) + " frames, average distance " +
            format_g9(report.average_distance) + " m -> " + out_path);
}

}  // namespace anchorloc
