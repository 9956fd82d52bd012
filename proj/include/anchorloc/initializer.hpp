#pragma once

#include "anchorloc/camera_model.hpp"
#include "anchorloc/types.hpp"

#include <vector>

namespace anchorloc {

struct InitialEstimate {
  Position3D position = Position3D::Zero();  // z = plane_height exactly
  std::vector<int> cameras_used;
  std::vector<Position3D> per_camera_ground_points;  // aligned with cameras_used
};

// Homography-based closed-form start: each visible camera's pixel is
// undistorted and mapped through the plane z = plane_height, the results are
// averaged unweighted. Cameras whose homography is degenerate are skipped;
// NoVisibleCamera when no entry is visible, DegenerateHomography when every
// visible camera had to be skipped.
InitialEstimate initial_estimate(const FrameObservations& observations,
                                 const std::vector<CameraParams>& cameras,
                                 double plane_height,
                                 const CameraModelOptions& options = {});

}  // namespace anchorloc
