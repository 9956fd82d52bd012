#include "anchorloc/camera_model.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace anchorloc {

double Extrinsics::orthonormality_error() const {
  Eigen::Matrix3d gram = rotation.transpose() * rotation;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

bool Extrinsics::is_valid(double tol) const {
  return orthonormality_error() <= tol && rotation.determinant() > 0.0;
}

const CameraParams* find_camera(const std::vector<CameraParams>& cameras, int id) {
  for (const auto& camera : cameras) {
    if (camera.id == id) return &camera;
  }
  return nullptr;
}

std::string to_string(Representative rep) {
  return rep == Representative::Head ? "HEAD" : "ANKLE";
}

Representative representative_from_string(const std::string& name) {
  if (name == "HEAD") return Representative::Head;
  if (name == "ANKLE") return Representative::Ankle;
  throw ParseError("unknown representative '" + name + "', expected HEAD or ANKLE");
}

int FrameObservations::visible_count() const {
  int n = 0;
  for (const auto& entry : entries) {
    if (entry.visible) ++n;
  }
  return n;
}

Position3D representative_point(const GroundTruthTrajectory& trajectory,
                                int frame_index, Representative rep) {
  if (frame_index < 0 || frame_index >= static_cast<int>(trajectory.positions.size()))
    throw InvalidArgument("frame index " + std::to_string(frame_index) +
                          " outside trajectory of length " +
                          std::to_string(trajectory.positions.size()));
  Position3D p = trajectory.positions[frame_index];
  p.z() = rep == Representative::Head ? trajectory.height : 0.0;
  return p;
}

namespace {

// camera-frame point, depth-checked
Eigen::Vector3d to_camera_frame(const Position3D& point, const CameraParams& camera,
                                const CameraModelOptions& options) {
  Eigen::Vector3d c = camera.extrinsics.rotation * point + camera.extrinsics.translation;
  if (!(c.z() > options.depth_epsilon))
    throw PointBehindCamera("camera " + std::to_string(camera.id) +
                            ": point at camera-frame depth " + std::to_string(c.z()));
  return c;
}

}  // namespace

Eigen::Vector2d distort(const Eigen::Vector2d& normalized, const Distortion& d) {
  const double r1 = normalized.x();
  const double r2 = normalized.y();
  const double s = r1 * r1 + r2 * r2;
  const double radial = 1.0 + s * (d.k1 + s * (d.k2 + s * d.k3));
  return {r1 * radial + 2.0 * d.p1 * r1 * r2 + d.p2 * (s + 2.0 * r1 * r1),
          r2 * radial + d.p1 * (s + 2.0 * r2 * r2) + 2.0 * d.p2 * r1 * r2};
}

Eigen::Matrix2d distort_jacobian(const Eigen::Vector2d& normalized, const Distortion& d) {
  const double r1 = normalized.x();
  const double r2 = normalized.y();
  const double s = r1 * r1 + r2 * r2;
  const double radial = 1.0 + s * (d.k1 + s * (d.k2 + s * d.k3));
  const double dradial = d.k1 + s * (2.0 * d.k2 + 3.0 * d.k3 * s);
  Eigen::Matrix2d jac;
  jac(0, 0) = radial + 2.0 * r1 * r1 * dradial + 2.0 * d.p1 * r2 + 6.0 * d.p2 * r1;
  jac(0, 1) = 2.0 * r1 * r2 * dradial + 2.0 * d.p1 * r1 + 2.0 * d.p2 * r2;
  jac(1, 0) = jac(0, 1);
  jac(1, 1) = radial + 2.0 * r2 * r2 * dradial + 6.0 * d.p1 * r2 + 2.0 * d.p2 * r1;
  return jac;
}

Eigen::Vector2d undistort(const Eigen::Vector2d& distorted, const Distortion& d,
                          const CameraModelOptions& options) {
  if (d.is_zero()) return distorted;
  Eigen::Vector2d r = distorted;
  for (int iter = 0; iter < options.max_undistort_iters; ++iter) {
    Eigen::Vector2d excess = distort(r, d) - r;
    r = distorted - excess;
    Eigen::Vector2d residual = distort(r, d) - distorted;
    if (!residual.allFinite()) break;
    if (residual.cwiseAbs().maxCoeff() < options.undistort_tol) return r;
  }
  throw NoConvergence("undistort did not reach " + std::to_string(options.undistort_tol) +
                      " within " + std::to_string(options.max_undistort_iters) +
                      " iterations");
}

Pixel2D project(const Position3D& point, const CameraParams& camera,
                const CameraModelOptions& options) {
  Eigen::Vector3d c = to_camera_frame(point, camera, options);
  Eigen::Vector2d r(c.x() / c.z(), c.y() / c.z());
  Eigen::Vector2d d = distort(r, camera.distortion);
  return {camera.intrinsics.fx * d.x() + camera.intrinsics.cx,
          camera.intrinsics.fy * d.y() + camera.intrinsics.cy};
}

ProjectionJacobians jacobians(const Position3D& point, const CameraParams& camera,
                              const CameraModelOptions& options) {
  const Eigen::Vector3d c = to_camera_frame(point, camera, options);
  const double inv_z = 1.0 / c.z();
  const Eigen::Vector2d r(c.x() * inv_z, c.y() * inv_z);
  const double r1 = r.x();
  const double r2 = r.y();
  const double s = r1 * r1 + r2 * r2;

  const Eigen::Matrix2d G = distort_jacobian(r, camera.distortion);
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  A(0, 0) = camera.intrinsics.fx;
  A(1, 1) = camera.intrinsics.fy;

  // normalization Jacobian d r / d c
  Eigen::Matrix<double, 2, 3> P;
  P << inv_z, 0.0, -r1 * inv_z,
       0.0, inv_z, -r2 * inv_z;

  const Eigen::Matrix<double, 2, 3> AGP = A * G * P;

  ProjectionJacobians out;
  out.d_pixel_d_x = AGP * camera.extrinsics.rotation;

  Eigen::Matrix<double, 2, kNumParams>& dh = out.d_pixel_d_h;
  // rotation increments about the camera axes move c by skew(e_i) * (c - T)
  const Eigen::Vector3d v = c - camera.extrinsics.translation;
  dh.col(kParamPitch) = AGP * Eigen::Vector3d(0.0, -v.z(), v.y());
  dh.col(kParamYaw) = AGP * Eigen::Vector3d(v.z(), 0.0, -v.x());
  dh.col(kParamRoll) = AGP * Eigen::Vector3d(-v.y(), v.x(), 0.0);
  dh.col(kParamTx) = AGP.col(0);
  dh.col(kParamTy) = AGP.col(1);
  dh.col(kParamTz) = AGP.col(2);
  dh.col(kParamK1) = A * Eigen::Vector2d(r1 * s, r2 * s);
  dh.col(kParamK2) = A * Eigen::Vector2d(r1 * s * s, r2 * s * s);
  dh.col(kParamP1) = A * Eigen::Vector2d(2.0 * r1 * r2, s + 2.0 * r2 * r2);
  dh.col(kParamP2) = A * Eigen::Vector2d(s + 2.0 * r1 * r1, 2.0 * r1 * r2);
  dh.col(kParamK3) = A * Eigen::Vector2d(r1 * s * s * s, r2 * s * s * s);
  const Eigen::Vector2d d = distort(r, camera.distortion);
  dh.col(kParamFx) = Eigen::Vector2d(d.x(), 0.0);
  dh.col(kParamFy) = Eigen::Vector2d(0.0, d.y());
  dh.col(kParamCx) = Eigen::Vector2d(1.0, 0.0);
  dh.col(kParamCy) = Eigen::Vector2d(0.0, 1.0);
  return out;
}

Eigen::Matrix3d plane_homography(const CameraParams& camera, double plane_height,
                                 const CameraModelOptions& options) {
  const Eigen::Matrix3d& R = camera.extrinsics.rotation;
  const Eigen::Vector3d& T = camera.extrinsics.translation;
  Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
  M(0, 0) = camera.intrinsics.fx;
  M(1, 1) = camera.intrinsics.fy;
  M(0, 2) = camera.intrinsics.cx;
  M(1, 2) = camera.intrinsics.cy;

  // forward map (x, y, 1) on the plane -> homogeneous undistorted pixel
  Eigen::Matrix3d G;
  G.col(0) = R.col(0);
  G.col(1) = R.col(1);
  G.col(2) = R.col(2) * plane_height + T;
  G = M * G;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(G);
  const auto& sv = svd.singularValues();
  if (!(sv(2) > 0.0) || sv(0) / sv(2) > options.cond_max)
    throw DegenerateHomography("camera " + std::to_string(camera.id) +
                               ": plane homography condition exceeds limit at height " +
                               std::to_string(plane_height));
  return G.inverse();
}

bool is_visible(const Position3D& point, const CameraParams& camera,
                const CameraModelOptions& options) {
  Eigen::Vector3d c = camera.extrinsics.rotation * point + camera.extrinsics.translation;
  if (!(c.z() > options.depth_epsilon)) return false;
  Eigen::Vector2d r(c.x() / c.z(), c.y() / c.z());
  Eigen::Vector2d d = distort(r, camera.distortion);
  const double u = camera.intrinsics.fx * d.x() + camera.intrinsics.cx;
  const double v = camera.intrinsics.fy * d.y() + camera.intrinsics.cy;
  const double m = options.margin_px;
  return u >= m && u <= camera.image_size.x() - m &&
         v >= m && v <= camera.image_size.y() - m;
}

Eigen::Matrix3d rotation_increment(double pitch, double yaw, double roll) {
  Eigen::Matrix3d rx, ry, rz;
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cr = std::cos(roll), sr = std::sin(roll);
  rx << 1, 0, 0,
        0, cp, -sp,
        0, sp, cp;
  ry << cy, 0, sy,
        0, 1, 0,
        -sy, 0, cy;
  rz << cr, -sr, 0,
        sr, cr, 0,
        0, 0, 1;
  return rz * ry * rx;
}

CameraParams apply_parameter_increment(const CameraParams& camera, const ParamVector& delta) {
  CameraParams out = camera;
  out.extrinsics.rotation =
      rotation_increment(delta(kParamPitch), delta(kParamYaw), delta(kParamRoll)) *
      camera.extrinsics.rotation;
  out.extrinsics.translation += delta.segment<3>(kParamTx);
  out.distortion.k1 += delta(kParamK1);
  out.distortion.k2 += delta(kParamK2);
  out.distortion.p1 += delta(kParamP1);
  out.distortion.p2 += delta(kParamP2);
  out.distortion.k3 += delta(kParamK3);
  out.intrinsics.fx += delta(kParamFx);
  out.intrinsics.fy += delta(kParamFy);
  out.intrinsics.cx += delta(kParamCx);
  out.intrinsics.cy += delta(kParamCy);
  return out;
}

Eigen::Vector3d back_project_ray(const CameraParams& camera, const Pixel2D& pixel,
                                 const CameraModelOptions& options) {
  Eigen::Vector2d q((pixel.x() - camera.intrinsics.cx) / camera.intrinsics.fx,
                    (pixel.y() - camera.intrinsics.cy) / camera.intrinsics.fy);
  Eigen::Vector2d r = undistort(q, camera.distortion, options);
  Eigen::Vector3d dir_cam(r.x(), r.y(), 1.0);
  return (camera.extrinsics.rotation.transpose() * dir_cam).normalized();
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PointBehindCamera: return "PointBehindCamera";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateHomography: return "DegenerateHomography";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyAnchorList: return "EmptyAnchorList";
    case ErrorCode::NoVisibleCamera: return "NoVisibleCamera";
    case ErrorCode::MissingWeights: return "MissingWeights";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoValidProbes: return "NoValidProbes";
    case ErrorCode::FovSamplingExhausted: return "FovSamplingExhausted";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace anchorloc
