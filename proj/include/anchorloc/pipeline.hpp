#pragma once

#include "anchorloc/anchor_weights.hpp"
#include "anchorloc/evaluation.hpp"
#include "anchorloc/io.hpp"
#include "anchorloc/localizer.hpp"
#include "anchorloc/simulator.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anchorloc {

// Everything cmd_simulate needs, parsed from a scene spec JSON file. The
// camera list comes either from an explicit "cameras" array or from a
// "camera_layout" perimeter generator.
struct SimulationSpec {
  SceneSpec scene;
  SimOptions sim_options;
  int n_targets = 1;
  int n_frames = 100;
  double step_sigma = 0.05;
  Representative representative = Representative::Ankle;
  NoiseSpec noise;
  std::optional<PerturbationSpec> perturbation;
};

SimulationSpec load_simulation_spec(const std::string& path);
SimulationSpec parse_simulation_spec(const std::string& text, const std::string& origin);

struct TargetHeights {
  double default_height = 1.7;
  std::map<int, double> by_target;

  double height_for(int target_id) const;
};

struct Dataset {
  std::vector<CameraParams> cameras;       // parameters the solver trusts
  std::vector<CameraParams> init_cameras;  // empty means same as cameras
  AnchorSet anchors;
  std::vector<FrameObservations> observations;
};

struct LocalizeSettings {
  Mode mode = Mode::Anchor;
  int anchor_limit = 0;  // 0 keeps all anchors
  double lambda = kDefaultWeightLambda;
  SmoothingConfig smoothing;
  SolverConfig solver;
  TargetHeights heights;  // plane height for Head-representative frames
  CameraModelOptions camera_options;
};

struct LocalizedFrame {
  int frame_index = 0;
  int target_id = 0;
  Position3D initial = Position3D::Zero();
  Position3D estimate = Position3D::Zero();
  int n_visible = 0;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
};

struct LocalizeOutput {
  std::vector<LocalizedFrame> frames;
  int n_skipped_no_visibility = 0;
  double residual_sq_sum = 0.0;  // over all cameras and frames, px^2
  int residual_count = 0;        // number of 2-vector residuals
  std::map<int, std::pair<double, int>> residual_sq_by_camera;
};

// Initializes, solves the weights, and runs the frame or batch solver over
// every observation frame, grouped per target. Frames with no visible camera
// are skipped and counted.
LocalizeOutput localize_dataset(const Dataset& dataset, const LocalizeSettings& settings);

struct RunConfig {
  std::string cameras_path;
  std::string anchors_path;
  std::string observations_path;
  Mode mode = Mode::Anchor;
  int anchor_limit = 0;
  double lambda = kDefaultWeightLambda;
  SmoothingConfig smoothing;
  SolverConfig solver;
  TargetHeights heights;
  std::string out_dir;
};

RunConfig load_run_config(const std::string& path);

// Subcommand bodies. Paths in the run config are resolved relative to the
// config file's directory.
void cmd_simulate(const std::string& scene_spec_path, const std::string& out_dir);
void cmd_perturb(const std::string& cameras_path, const std::string& perturbation_path,
                 std::uint64_t seed, const std::string& out_path);
void cmd_localize(const std::string& run_config_path, const std::string& out_dir_override);
void cmd_evaluate(const std::string& estimates_path, const std::string& truth_path,
                  const std::string& initials_path, const std::string& observations_path,
                  const std::string& out_path);

// Join of estimates/truth/initials on (frame, target), with visibility
// counts taken from the observations when provided.
std::vector<EvalRow> build_eval_rows(const std::vector<EstimateRecord>& estimates,
                                     const std::vector<TrajectoryRecord>& truth,
                                     const std::vector<TrajectoryRecord>& initials,
                                     const std::vector<FrameObservations>* observations);

}  // namespace anchorloc
