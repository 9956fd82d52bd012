#pragma once

#include "anchorloc/camera_model.hpp"
#include "anchorloc/types.hpp"

#include <cstdint>
#include <vector>

namespace anchorloc {

struct SceneSpec {
  Eigen::Vector2d extent = Eigen::Vector2d::Zero();  // (length, width), meters
  std::vector<CameraParams> cameras;
  int anchors_per_camera = 10;
  std::uint64_t rng_seed = 0;
};

struct SimOptions {
  double height_min = 1.5;         // target heads, uniform
  double height_max = 1.9;
  double anchor_height_max = 2.5;  // anchors uniform in z over [0, this]
  int max_rejects = 100000;        // visibility rejection-sampling budget
};

struct NoiseSpec {
  double pixel_sigma = 0.0;         // target observations, px
  double anchor_pixel_sigma = 0.0;  // anchor observations, px
};

enum class SignMode { Both, Positive, Negative };

std::string to_string(SignMode mode);
SignMode sign_mode_from_string(const std::string& name);

// Applied per camera: pitch and yaw offsets of +-rx_deg/+-ry_deg (sign drawn
// uniformly under Both, forced otherwise), translation shifted by a uniform
// random direction of exact length t_m, every distortion coefficient scaled
// by (1 +- d_rel) with an independent sign. Roll and intrinsics untouched.
struct PerturbationSpec {
  double rx_deg = 0.0;
  double ry_deg = 0.0;
  double t_m = 0.0;
  double d_rel = 0.0;
  SignMode sign_mode = SignMode::Both;
};

// Deterministic stream split: same (seed, salt) always yields the same draw.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Seed of one camera's anchor sampling stream, decoupled from every other
// draw made under the same scene seed.
std::uint64_t anchor_stream_seed(std::uint64_t scene_seed, int camera_id);

// Gaussian random walks on the ground rectangle with boundary reflection;
// per-target head heights uniform in [height_min, height_max]. Seeded from
// scene.rng_seed.
std::vector<GroundTruthTrajectory> simulate_trajectories(const SceneSpec& scene,
                                                         int n_targets,
                                                         int n_frames,
                                                         double step_sigma,
                                                         const SimOptions& options = {});

// Rejection-samples n points uniform over extent x [0, anchor_height_max]
// that are visible in `camera`, then projects them (plus optional pixel
// noise) to form the anchor observations. Throws FovSamplingExhausted when
// max_rejects draws do not produce n visible points.
std::vector<Anchor> sample_anchors(const SceneSpec& scene, const CameraParams& camera,
                                   int n, double anchor_pixel_sigma, std::uint64_t seed,
                                   const SimOptions& options = {});

std::vector<CameraParams> perturb_cameras(const std::vector<CameraParams>& cameras,
                                          const PerturbationSpec& perturbation,
                                          std::uint64_t seed);

// Projects each target's representative point into every true camera,
// keeping visible entries with optional iid pixel noise.
std::vector<FrameObservations> render_observations(
    const std::vector<GroundTruthTrajectory>& trajectories,
    const std::vector<CameraParams>& cameras,
    const NoiseSpec& noise,
    Representative representative,
    std::uint64_t seed);

// Evenly spaced cameras along the perimeter of the extent rectangle inset by
// `inset`, at the given height, each aimed at the scene center at
// look_at_height. Ids run 0..count-1.
std::vector<CameraParams> make_perimeter_cameras(const Eigen::Vector2d& extent,
                                                 int count,
                                                 double height,
                                                 const Intrinsics& intrinsics,
                                                 const Eigen::Vector2i& image_size,
                                                 const Distortion& distortion,
                                                 double look_at_height,
                                                 double inset);

// Camera with rotation aiming the optical axis from `position` to `look_at`,
// image x kept horizontal (world z as the up reference).
CameraParams make_look_at_camera(int id, const Position3D& position,
                                 const Position3D& look_at,
                                 const Intrinsics& intrinsics,
                                 const Eigen::Vector2i& image_size,
                                 const Distortion& distortion);

}  // namespace anchorloc
