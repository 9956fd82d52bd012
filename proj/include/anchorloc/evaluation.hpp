#pragma once

#include "anchorloc/camera_model.hpp"
#include "anchorloc/types.hpp"

#include <map>
#include <vector>

namespace anchorloc {

struct MetricsBreakdown {
  int n_frames = 0;
  double average_distance = 0.0;
  double distance_std = 0.0;        // population convention
  double improvement_ratio = 0.0;   // strict: dist(estimate) < dist(initial)
};

struct MetricsReport {
  int n_frames = 0;
  double average_distance = 0.0;
  double distance_std = 0.0;
  double improvement_ratio = 0.0;
  std::map<int, MetricsBreakdown> per_target;
  MetricsBreakdown single_camera;  // frames seen by exactly one camera
  MetricsBreakdown multi_camera;
};

struct EvalRow {
  Position3D estimate = Position3D::Zero();
  Position3D truth = Position3D::Zero();
  Position3D initial = Position3D::Zero();
  int target_id = 0;
  int n_visible = -1;  // -1 unknown; 1 selects the in-plane 2D distance
};

// Distances are Euclidean; frames with n_visible == 1 are compared in the
// ground plane only (their z was pinned, not estimated).
MetricsReport evaluate(const std::vector<EvalRow>& rows);

// Convenience over aligned columns; LengthMismatch when sizes differ.
MetricsReport evaluate(const std::vector<Position3D>& estimates,
                       const std::vector<Position3D>& truth,
                       const std::vector<Position3D>& initials);

struct AngularErrorOptions {
  double probe_depth = 10.0;  // meters along the ray
  CameraModelOptions camera;
};

// Directional disagreement between two calibrations of the same camera, in
// degrees. Each probe pixel is back-projected under one calibration to
// probe_depth, and the resulting world point is measured against the other
// calibration's ray through the same pixel; both directions are averaged, so
// the metric is symmetric in (a, b). Probes invalid in either calibration
// (outside the image or undistort divergence) are dropped; NoValidProbes
// when none survive.
double angular_error_deg(const CameraParams& a, const CameraParams& b,
                         const std::vector<Pixel2D>& probes,
                         const AngularErrorOptions& options = {});

// 5x5 grid spanning the central 80% of the image.
std::vector<Pixel2D> default_probe_grid(const CameraParams& camera);

// Least-squares slope of log10(y) against log10(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace anchorloc
