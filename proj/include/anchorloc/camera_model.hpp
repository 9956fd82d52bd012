#pragma once

#include "anchorloc/errors.hpp"
#include "anchorloc/types.hpp"

namespace anchorloc {

// Layout of the per-camera perturbable parameter vector h. Rotation entries
// are camera-frame angle increments applied as R_new = Rz(roll) * Ry(yaw) *
// Rx(pitch) * R with T unchanged; the remaining entries are additive.
enum ParamIndex : int {
  kParamPitch = 0,
  kParamYaw = 1,
  kParamRoll = 2,
  kParamTx = 3,
  kParamTy = 4,
  kParamTz = 5,
  kParamK1 = 6,
  kParamK2 = 7,
  kParamP1 = 8,
  kParamP2 = 9,
  kParamK3 = 10,
  kParamFx = 11,
  kParamFy = 12,
  kParamCx = 13,
  kParamCy = 14,
  kNumParams = 15,
};

using ParamVector = Eigen::Matrix<double, kNumParams, 1>;

struct ProjectionJacobians {
  Eigen::Matrix<double, 2, 3> d_pixel_d_x;           // wrt the world point
  Eigen::Matrix<double, 2, kNumParams> d_pixel_d_h;  // wrt camera parameters
};

struct CameraModelOptions {
  double depth_epsilon = 1e-6;   // meters; camera-frame z at or below is invalid
  double undistort_tol = 1e-10;  // normalized-coordinate residual bound
  int max_undistort_iters = 50;
  double cond_max = 1e12;        // homography condition limit
  double margin_px = 0.0;        // visibility border margin
};

// Pinhole projection with Brown-Conrady distortion.
// Throws PointBehindCamera when camera-frame depth <= depth_epsilon.
Pixel2D project(const Position3D& point, const CameraParams& camera,
                const CameraModelOptions& options = {});

// Distortion map d(r) on normalized image coordinates.
Eigen::Vector2d distort(const Eigen::Vector2d& normalized, const Distortion& distortion);

// 2x2 Jacobian of d(r).
Eigen::Matrix2d distort_jacobian(const Eigen::Vector2d& normalized,
                                 const Distortion& distortion);

// Inverts d(r) by fixed-point iteration r <- q - (d(r) - r).
// Throws NoConvergence when the residual bound is not met.
Eigen::Vector2d undistort(const Eigen::Vector2d& distorted, const Distortion& distortion,
                          const CameraModelOptions& options = {});

// Analytic Jacobians of the projected pixel wrt the world point and wrt h.
ProjectionJacobians jacobians(const Position3D& point, const CameraParams& camera,
                              const CameraModelOptions& options = {});

// Maps homogeneous undistorted pixels to points on the plane z = plane_height:
// H * (u, v, 1) ~ (x, y, 1). Throws DegenerateHomography when the forward
// map's condition number exceeds cond_max.
Eigen::Matrix3d plane_homography(const CameraParams& camera, double plane_height,
                                 const CameraModelOptions& options = {});

// In front of the camera and inside the image rectangle shrunk by margin_px
// (closed interval; the exact border counts as visible).
bool is_visible(const Position3D& point, const CameraParams& camera,
                const CameraModelOptions& options = {});

// Rz(roll) * Ry(yaw) * Rx(pitch), radians.
Eigen::Matrix3d rotation_increment(double pitch, double yaw, double roll);

// Applies a delta in the ParamIndex layout to a copy of the camera.
CameraParams apply_parameter_increment(const CameraParams& camera,
                                       const ParamVector& delta);

// Unit direction in world coordinates of the viewing ray through a pixel.
Eigen::Vector3d back_project_ray(const CameraParams& camera, const Pixel2D& pixel,
                                 const CameraModelOptions& options = {});

}  // namespace anchorloc
