#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace anchorloc {

// World frame: right-handed, z up, ground plane z = 0, units meters.
// Pixel frame: u right, v down, origin at the top-left image corner.
using Position3D = Eigen::Vector3d;
using Pixel2D = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

// Camera frame: x right, y down, z along the optical axis.
// Maps world points as c = rotation * x + translation.
struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  // max |(R^T R - I)_ij|, plus det sign folded in by is_valid
  double orthonormality_error() const;
  bool is_valid(double tol = 1e-10) const;
};

// Brown-Conrady coefficients, stored in the on-disk order [k1, k2, p1, p2, k3].
struct Distortion {
  double k1 = 0.0;
  double k2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double k3 = 0.0;

  bool is_zero() const {
    return k1 == 0.0 && k2 == 0.0 && p1 == 0.0 && p2 == 0.0 && k3 == 0.0;
  }
};

struct CameraParams {
  int id = -1;
  Eigen::Vector2i image_size = Eigen::Vector2i::Zero();  // (width, height)
  Intrinsics intrinsics;
  Extrinsics extrinsics;
  Distortion distortion;

  // optical center in world coordinates, -R^T T
  Position3D center() const {
    return -(extrinsics.rotation.transpose() * extrinsics.translation);
  }
};

const CameraParams* find_camera(const std::vector<CameraParams>& cameras, int id);

// Which body point the pixel observations refer to.
enum class Representative { Head, Ankle };

std::string to_string(Representative rep);
Representative representative_from_string(const std::string& name);

struct ObservationEntry {
  int camera_id = -1;
  bool visible = false;
  Pixel2D pixel = Pixel2D::Zero();  // meaningful only when visible
};

struct FrameObservations {
  int frame_index = 0;
  int target_id = 0;
  Representative representative = Representative::Ankle;
  std::vector<ObservationEntry> entries;

  int visible_count() const;
};

// One landmark with known world position observed by one camera.
struct Anchor {
  int camera_id = -1;
  int anchor_id = -1;
  Position3D world = Position3D::Zero();
  Pixel2D observed_pixel = Pixel2D::Zero();
};

struct AnchorWeights {
  int camera_id = -1;
  double lambda_used = 0.0;
  std::vector<std::pair<int, double>> weights;  // (anchor_id, weight)
};

struct GroundTruthTrajectory {
  int target_id = 0;
  double height = 0.0;                  // head height above ground
  std::vector<Position3D> positions;    // per frame, z = 0 (ground track)
};

Position3D representative_point(const GroundTruthTrajectory& trajectory,
                                int frame_index, Representative rep);

}  // namespace anchorloc
