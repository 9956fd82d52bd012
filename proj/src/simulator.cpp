#include "anchorloc/simulator.hpp"

#include <cmath>
#include <random>
#include <string>

namespace anchorloc {

namespace {

constexpr std::uint64_t kSaltTrajectories = 0x7261'6a65'6374'6f72ULL;
constexpr std::uint64_t kSaltAnchors = 0x616e'6368'6f72'7321ULL;
constexpr std::uint64_t kSaltPerturb = 0x7065'7274'7572'6221ULL;
constexpr std::uint64_t kSaltObservations = 0x6f62'7365'7276'6521ULL;

// triangle-wave fold into [0, hi]
double reflect(double value, double hi) {
  if (hi <= 0.0) return 0.0;
  const double period = 2.0 * hi;
  double m = std::fmod(value, period);
  if (m < 0.0) m += period;
  return m <= hi ? m : period - m;
}

int draw_sign(std::mt19937_64& rng, SignMode mode) {
  switch (mode) {
    case SignMode::Positive: return 1;
    case SignMode::Negative: return -1;
    case SignMode::Both: break;
  }
  return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? -1 : 1;
}

}  // namespace

std::string to_string(SignMode mode) {
  switch (mode) {
    case SignMode::Positive: return "POSITIVE";
    case SignMode::Negative: return "NEGATIVE";
    case SignMode::Both: break;
  }
  return "BOTH";
}

SignMode sign_mode_from_string(const std::string& name) {
  if (name == "BOTH") return SignMode::Both;
  if (name == "POSITIVE") return SignMode::Positive;
  if (name == "NEGATIVE") return SignMode::Negative;
  throw ParseError("unknown sign mode '" + name + "'");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 round over the xor
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t anchor_stream_seed(std::uint64_t scene_seed, int camera_id) {
  return mix_seed(mix_seed(scene_seed, kSaltAnchors), static_cast<std::uint64_t>(camera_id));
}

std::vector<GroundTruthTrajectory> simulate_trajectories(const SceneSpec& scene,
                                                         int n_targets, int n_frames,
                                                         double step_sigma,
                                                         const SimOptions& options) {
  if (n_targets <= 0 || n_frames <= 0)
    throw InvalidArgument("need positive target and frame counts");
  if (step_sigma < 0.0) throw InvalidArgument("negative step sigma");
  if (!(scene.extent.x() > 0.0 && scene.extent.y() > 0.0))
    throw InvalidArgument("scene extent must be positive");

  std::mt19937_64 rng(mix_seed(scene.rng_seed, kSaltTrajectories));
  std::uniform_real_distribution<double> ux(0.0, scene.extent.x());
  std::uniform_real_distribution<double> uy(0.0, scene.extent.y());
  std::uniform_real_distribution<double> uh(options.height_min, options.height_max);
  std::normal_distribution<double> step(0.0, step_sigma > 0.0 ? step_sigma : 1.0);

  std::vector<GroundTruthTrajectory> out(n_targets);
  for (int k = 0; k < n_targets; ++k) {
    GroundTruthTrajectory& traj = out[k];
    traj.target_id = k;
    traj.positions.resize(n_frames);
    double x = ux(rng);
    double y = uy(rng);
    traj.height = uh(rng);
    traj.positions[0] = Position3D(x, y, 0.0);
    for (int t = 1; t < n_frames; ++t) {
      if (step_sigma > 0.0) {
        x = reflect(x + step(rng), scene.extent.x());
        y = reflect(y + step(rng), scene.extent.y());
      }
      traj.positions[t] = Position3D(x, y, 0.0);
    }
  }
  return out;
}

std::vector<Anchor> sample_anchors(const SceneSpec& scene, const CameraParams& camera,
                                   int n, double anchor_pixel_sigma, std::uint64_t seed,
                                   const SimOptions& options) {
  if (n <= 0) throw InvalidArgument("need a positive anchor count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, scene.extent.x());
  std::uniform_real_distribution<double> uy(0.0, scene.extent.y());
  std::uniform_real_distribution<double> uz(0.0, options.anchor_height_max);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Anchor> out;
  out.reserve(n);
  int draws = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++draws > options.max_rejects)
      throw FovSamplingExhausted("camera " + std::to_string(camera.id) + ": " +
                                 std::to_string(draws - 1) + " draws yielded only " +
                                 std::to_string(out.size()) + " of " + std::to_string(n) +
                                 " visible anchors");
    Position3D p(ux(rng), uy(rng), uz(rng));
    if (!is_visible(p, camera)) continue;
    Anchor a;
    a.camera_id = camera.id;
    a.anchor_id = static_cast<int>(out.size());
    a.world = p;
    a.observed_pixel = project(p, camera);
    if (anchor_pixel_sigma > 0.0) {
      a.observed_pixel.x() += anchor_pixel_sigma * noise(rng);
      a.observed_pixel.y() += anchor_pixel_sigma * noise(rng);
    }
    out.push_back(a);
  }
  return out;
}

std::vector<CameraParams> perturb_cameras(const std::vector<CameraParams>& cameras,
                                          const PerturbationSpec& perturbation,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, kSaltPerturb));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<CameraParams> out;
  out.reserve(cameras.size());
  for (const CameraParams& camera : cameras) {
    CameraParams p = camera;

    double pitch = 0.0, yaw = 0.0;
    if (perturbation.rx_deg != 0.0)
      pitch = draw_sign(rng, perturbation.sign_mode) * deg_to_rad(perturbation.rx_deg);
    if (perturbation.ry_deg != 0.0)
      yaw = draw_sign(rng, perturbation.sign_mode) * deg_to_rad(perturbation.ry_deg);
    if (pitch != 0.0 || yaw != 0.0)
      p.extrinsics.rotation = rotation_increment(pitch, yaw, 0.0) * p.extrinsics.rotation;

    if (perturbation.t_m != 0.0) {
      Eigen::Vector3d dir;
      do {
        dir = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      } while (dir.norm() < 1e-12);
      p.extrinsics.translation += perturbation.t_m * dir.normalized();
    }

    if (perturbation.d_rel != 0.0) {
      auto scale = [&](double coef) {
        return coef * (1.0 + draw_sign(rng, perturbation.sign_mode) * perturbation.d_rel);
      };
      p.distortion.k1 = scale(p.distortion.k1);
      p.distortion.k2 = scale(p.distortion.k2);
      p.distortion.p1 = scale(p.distortion.p1);
      p.distortion.p2 = scale(p.distortion.p2);
      p.distortion.k3 = scale(p.distortion.k3);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<FrameObservations> render_observations(
    const std::vector<GroundTruthTrajectory>& trajectories,
    const std::vector<CameraParams>& cameras, const NoiseSpec& noise,
    Representative representative, std::uint64_t seed) {
  if (trajectories.empty()) throw InvalidArgument("no trajectories to render");
  const size_t n_frames = trajectories.front().positions.size();
  for (const auto& traj : trajectories) {
    if (traj.positions.size() != n_frames)
      throw LengthMismatch("trajectories differ in frame count");
  }

  std::mt19937_64 rng(mix_seed(seed, kSaltObservations));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<FrameObservations> out;
  out.reserve(n_frames * trajectories.size());
  for (size_t t = 0; t < n_frames; ++t) {
    for (const auto& traj : trajectories) {
      FrameObservations frame;
      frame.frame_index = static_cast<int>(t);
      frame.target_id = traj.target_id;
      frame.representative = representative;
      Position3D point = representative_point(traj, static_cast<int>(t), representative);
      for (const CameraParams& camera : cameras) {
        if (!is_visible(point, camera)) continue;
        ObservationEntry entry;
        entry.camera_id = camera.id;
        entry.visible = true;
        entry.pixel = project(point, camera);
        if (noise.pixel_sigma > 0.0) {
          entry.pixel.x() += noise.pixel_sigma * gauss(rng);
          entry.pixel.y() += noise.pixel_sigma * gauss(rng);
        }
        frame.entries.push_back(entry);
      }
      out.push_back(std::move(frame));
    }
  }
  return out;
}

CameraParams make_look_at_camera(int id, const Position3D& position,
                                 const Position3D& look_at, const Intrinsics& intrinsics,
                                 const Eigen::Vector2i& image_size,
                                 const Distortion& distortion) {
  Eigen::Vector3d forward = look_at - position;
  if (forward.norm() < 1e-12) throw InvalidArgument("camera aimed at its own position");
  forward.normalize();

  // image x horizontal; fall back for straight-down or straight-up views
  Eigen::Vector3d right(forward.y(), -forward.x(), 0.0);
  if (right.norm() < 1e-9) {
    right = Eigen::Vector3d(1.0, 0.0, 0.0);
  } else {
    right.normalize();
  }
  Eigen::Vector3d down = forward.cross(right);

  CameraParams camera;
  camera.id = id;
  camera.image_size = image_size;
  camera.intrinsics = intrinsics;
  camera.distortion = distortion;
  camera.extrinsics.rotation.row(0) = right.transpose();
  camera.extrinsics.rotation.row(1) = down.transpose();
  camera.extrinsics.rotation.row(2) = forward.transpose();
  camera.extrinsics.translation = -(camera.extrinsics.rotation * position);
  return camera;
}

std::vector<CameraParams> make_perimeter_cameras(const Eigen::Vector2d& extent, int count,
                                                 double height, const Intrinsics& intrinsics,
                                                 const Eigen::Vector2i& image_size,
                                                 const Distortion& distortion,
                                                 double look_at_height, double inset) {
  if (count <= 0) throw InvalidArgument("need a positive camera count");
  const double lx = extent.x() - 2.0 * inset;
  const double ly = extent.y() - 2.0 * inset;
  if (!(lx > 0.0 && ly > 0.0)) throw InvalidArgument("inset swallows the extent");
  const double perimeter = 2.0 * (lx + ly);
  const Position3D center(extent.x() / 2.0, extent.y() / 2.0, look_at_height);

  std::vector<CameraParams> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    double s = (i + 0.5) * perimeter / count;
    double x, y;
    if (s < lx) {
      x = inset + s;
      y = inset;
    } else if (s < lx + ly) {
      x = extent.x() - inset;
      y = inset + (s - lx);
    } else if (s < 2.0 * lx + ly) {
      x = extent.x() - inset - (s - lx - ly);
      y = extent.y() - inset;
    } else {
      x = inset;
      y = extent.y() - inset - (s - 2.0 * lx - ly);
    }
    out.push_back(make_look_at_camera(i, Position3D(x, y, height), center, intrinsics,
                                      image_size, distortion));
  }
  return out;
}

}  // namespace anchorloc
