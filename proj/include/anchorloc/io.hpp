#pragma once

#include "anchorloc/types.hpp"

#include <string>
#include <vector>

namespace anchorloc {

// On-disk schemas. All CSV output uses %.9g, '.' decimal separator and LF
// endings; identical inputs must serialize to identical bytes.
//
//   cameras JSON        array of {id, image_size: [w, h], intrinsics:
//                       {fx, fy, cx, cy}, rotation: 9 row-major numbers,
//                       translation: [3], distortion: [k1, k2, p1, p2, k3]}
//   anchors CSV         camera_id,anchor_id,x,y,z,u,v
//   trajectories CSV    frame,target_id,x,y,z
//   observations JSONL  {"frame": i, "target_id": t, "representative":
//                       "HEAD"|"ANKLE", "entries": [{"camera_id": c,
//                       "u": ..., "v": ...}, ...]} per line
//   estimates CSV       frame,target_id,x,y,z,converged,objective

std::string format_g9(double value);

struct EstimateRecord {
  int frame_index = 0;
  int target_id = 0;
  Position3D position = Position3D::Zero();
  bool converged = false;
  double objective = 0.0;
};

struct TrajectoryRecord {
  int frame_index = 0;
  int target_id = 0;
  Position3D position = Position3D::Zero();
};

std::vector<CameraParams> load_cameras_json(const std::string& path);
std::vector<CameraParams> parse_cameras_json(const std::string& text,
                                             const std::string& origin);
void save_cameras_json(const std::string& path, const std::vector<CameraParams>& cameras);

std::vector<Anchor> load_anchors_csv(const std::string& path);
void save_anchors_csv(const std::string& path, const std::vector<Anchor>& anchors);

std::vector<TrajectoryRecord> load_trajectories_csv(const std::string& path);
void save_trajectories_csv(const std::string& path,
                           const std::vector<TrajectoryRecord>& records);

std::vector<FrameObservations> load_observations_jsonl(const std::string& path);
void save_observations_jsonl(const std::string& path,
                             const std::vector<FrameObservations>& observations);

std::vector<EstimateRecord> load_estimates_csv(const std::string& path);
void save_estimates_csv(const std::string& path,
                        const std::vector<EstimateRecord>& records);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace anchorloc
