#include "anchorloc/initializer.hpp"

#include <cmath>
#include <string>

namespace anchorloc {

InitialEstimate initial_estimate(const FrameObservations& observations,
                                 const std::vector<CameraParams>& cameras,
                                 double plane_height,
                                 const CameraModelOptions& options) {
  InitialEstimate out;
  int n_visible = 0;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();

  for (const auto& entry : observations.entries) {
    if (!entry.visible) continue;
    ++n_visible;
    const CameraParams* camera = find_camera(cameras, entry.camera_id);
    if (camera == nullptr)
      throw InvalidArgument("observation references unknown camera " +
                            std::to_string(entry.camera_id));

    Eigen::Matrix3d H;
    try {
      H = plane_homography(*camera, plane_height, options);
    } catch (const DegenerateHomography&) {
      continue;
    }

    const auto& in = camera->intrinsics;
    Eigen::Vector2d q((entry.pixel.x() - in.cx) / in.fx, (entry.pixel.y() - in.cy) / in.fy);
    Eigen::Vector2d r = undistort(q, camera->distortion, options);
    Eigen::Vector3d pixel_ud(in.fx * r.x() + in.cx, in.fy * r.y() + in.cy, 1.0);
    Eigen::Vector3d w = H * pixel_ud;
    Eigen::Vector2d ground(w.x() / w.z(), w.y() / w.z());
    if (!ground.allFinite()) continue;

    sum += ground;
    out.cameras_used.push_back(entry.camera_id);
    out.per_camera_ground_points.emplace_back(ground.x(), ground.y(), plane_height);
  }

  if (n_visible == 0) throw NoVisibleCamera("frame has no visible observation");
  if (out.cameras_used.empty())
    throw DegenerateHomography("every visible camera was degenerate for height " +
                               std::to_string(plane_height));

  sum /= static_cast<double>(out.cameras_used.size());
  out.position = Position3D(sum.x(), sum.y(), plane_height);
  return out;
}

}  // namespace anchorloc
