#include "anchorloc/io.hpp"

#include "anchorloc/errors.hpp"
#include "json_util.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace anchorloc {

std::string format_g9(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed on '" + path + "'");
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path + "': " + std::strerror(errno));
  out << content;
  out.flush();
  if (!out) throw IoError("write failed on '" + path + "'");
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty() && current.back() == '\r') current.pop_back();
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_double(const std::string& token, const std::string& origin, size_t line_no) {
  try {
    size_t used = 0;
    double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ParseError(origin + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
  }
}

int parse_int(const std::string& token, const std::string& origin, size_t line_no) {
  try {
    size_t used = 0;
    int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ParseError(origin + ":" + std::to_string(line_no) + ": bad integer '" + token + "'");
  }
}

// header-checked CSV body rows
std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                const std::string& origin,
                                                const std::string& expected_header,
                                                size_t n_fields) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty())
    throw ParseError(origin + ": empty file, expected header '" + expected_header + "'");
  if (lines.front() != expected_header)
    throw ParseError(origin + ":1: header is '" + lines.front() + "', expected '" +
                     expected_header + "'");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(lines.size() - 1);
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != n_fields)
      throw ParseError(origin + ":" + std::to_string(i + 1) + ": got " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(n_fields));
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<CameraParams> parse_cameras_json(const std::string& text,
                                             const std::string& origin) {
  ordered_json root = parse_json_text(text, origin);
  if (!root.is_array())
    throw ParseError(origin + ": top level must be an array of cameras");

  std::vector<CameraParams> cameras;
  std::set<int> seen_ids;
  for (size_t i = 0; i < root.size(); ++i) {
    const std::string path = origin + ":/" + std::to_string(i);
    const ordered_json& c = root[i];
    CameraParams camera;
    camera.id = require_int(require_key(c, "id", path), path + "/id");
    if (!seen_ids.insert(camera.id).second)
      throw ParseError(path + "/id: duplicate camera id " + std::to_string(camera.id));

    const ordered_json& size = require_key(c, "image_size", path);
    if (!size.is_array() || size.size() != 2)
      throw ParseError(path + "/image_size: expected [width, height]");
    camera.image_size.x() = require_int(size[0], path + "/image_size/0");
    camera.image_size.y() = require_int(size[1], path + "/image_size/1");
    if (camera.image_size.x() <= 0 || camera.image_size.y() <= 0)
      throw ParseError(path + "/image_size: must be positive");

    const ordered_json& intr = require_key(c, "intrinsics", path);
    camera.intrinsics.fx = require_number(require_key(intr, "fx", path + "/intrinsics"),
                                          path + "/intrinsics/fx");
    camera.intrinsics.fy = require_number(require_key(intr, "fy", path + "/intrinsics"),
                                          path + "/intrinsics/fy");
    camera.intrinsics.cx = require_number(require_key(intr, "cx", path + "/intrinsics"),
                                          path + "/intrinsics/cx");
    camera.intrinsics.cy = require_number(require_key(intr, "cy", path + "/intrinsics"),
                                          path + "/intrinsics/cy");
    if (!(camera.intrinsics.fx > 0.0) || !(camera.intrinsics.fy > 0.0))
      throw ParseError(path + "/intrinsics: focal lengths must be positive");

    const ordered_json& rot = require_key(c, "rotation", path);
    if (!rot.is_array() || rot.size() != 9)
      throw ParseError(path + "/rotation: expected 9 row-major numbers");
    for (int k = 0; k < 9; ++k) {
      camera.extrinsics.rotation(k / 3, k % 3) =
          require_number(rot[k], path + "/rotation/" + std::to_string(k));
    }
    if (!camera.extrinsics.is_valid(1e-10))
      throw ParseError(path + "/rotation: not orthonormal within 1e-10 (or not a proper "
                       "rotation)");

    const ordered_json& tr = require_key(c, "translation", path);
    if (!tr.is_array() || tr.size() != 3)
      throw ParseError(path + "/translation: expected 3 numbers");
    for (int k = 0; k < 3; ++k) {
      camera.extrinsics.translation(k) =
          require_number(tr[k], path + "/translation/" + std::to_string(k));
    }

    const ordered_json& dist = require_key(c, "distortion", path);
    if (!dist.is_array() || dist.size() != 5)
      throw ParseError(path + "/distortion: expected [k1, k2, p1, p2, k3]");
    camera.distortion.k1 = require_number(dist[0], path + "/distortion/0");
    camera.distortion.k2 = require_number(dist[1], path + "/distortion/1");
    camera.distortion.p1 = require_number(dist[2], path + "/distortion/2");
    camera.distortion.p2 = require_number(dist[3], path + "/distortion/3");
    camera.distortion.k3 = require_number(dist[4], path + "/distortion/4");

    cameras.push_back(std::move(camera));
  }
  return cameras;
}

std::vector<CameraParams> load_cameras_json(const std::string& path) {
  return parse_cameras_json(read_text_file(path), path);
}

void save_cameras_json(const std::string& path, const std::vector<CameraParams>& cameras) {
  ordered_json root = ordered_json::array();
  for (const CameraParams& camera : cameras) {
    ordered_json c;
    c["id"] = camera.id;
    c["image_size"] = {camera.image_size.x(), camera.image_size.y()};
    c["intrinsics"] = {{"fx", camera.intrinsics.fx},
                       {"fy", camera.intrinsics.fy},
                       {"cx", camera.intrinsics.cx},
                       {"cy", camera.intrinsics.cy}};
    ordered_json rot = ordered_json::array();
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) rot.push_back(camera.extrinsics.rotation(r, col));
    }
    c["rotation"] = std::move(rot);
    c["translation"] = {camera.extrinsics.translation.x(),
                        camera.extrinsics.translation.y(),
                        camera.extrinsics.translation.z()};
    c["distortion"] = {camera.distortion.k1, camera.distortion.k2, camera.distortion.p1,
                       camera.distortion.p2, camera.distortion.k3};
    root.push_back(std::move(c));
  }
  write_text_file(path, root.dump(2) + "\n");
}

std::vector<Anchor> load_anchors_csv(const std::string& path) {
  auto rows = parse_csv(read_text_file(path), path, "camera_id,anchor_id,x,y,z,u,v", 7);
  std::vector<Anchor> anchors;
  anchors.reserve(rows.size());
  size_t line_no = 1;
  for (const auto& row : rows) {
    ++line_no;
    Anchor a;
    a.camera_id = parse_int(row[0], path, line_no);
    a.anchor_id = parse_int(row[1], path, line_no);
    a.world = Position3D(parse_double(row[2], path, line_no),
                         parse_double(row[3], path, line_no),
                         parse_double(row[4], path, line_no));
    a.observed_pixel = Pixel2D(parse_double(row[5], path, line_no),
                               parse_double(row[6], path, line_no));
    anchors.push_back(a);
  }
  return anchors;
}

void save_anchors_csv(const std::string& path, const std::vector<Anchor>& anchors) {
  std::string out = "camera_id,anchor_id,x,y,z,u,v\n";
  for (const Anchor& a : anchors) {
    out += std::to_string(a.camera_id) + "," + std::to_string(a.anchor_id) + "," +
           format_g9(a.world.x()) + "," + format_g9(a.world.y()) + "," +
           format_g9(a.world.z()) + "," + format_g9(a.observed_pixel.x()) + "," +
           format_g9(a.observed_pixel.y()) + "\n";
  }
  write_text_file(path, out);
}

std::vector<TrajectoryRecord> load_trajectories_csv(const std::string& path) {
  auto rows = parse_csv(read_text_file(path), path, "frame,target_id,x,y,z", 5);
  std::vector<TrajectoryRecord> records;
  records.reserve(rows.size());
  size_t line_no = 1;
  for (const auto& row : rows) {
    ++line_no;
    TrajectoryRecord rec;
    rec.frame_index = parse_int(row[0], path, line_no);
    rec.target_id = parse_int(row[1], path, line_no);
    rec.position = Position3D(parse_double(row[2], path, line_no),
                              parse_double(row[3], path, line_no),
                              parse_double(row[4], path, line_no));
    records.push_back(rec);
  }
  return records;
}

void save_trajectories_csv(const std::string& path,
                           const std::vector<TrajectoryRecord>& records) {
  std::string out = "frame,target_id,x,y,z\n";
  for (const TrajectoryRecord& rec : records) {
    out += std::to_string(rec.frame_index) + "," + std::to_string(rec.target_id) + "," +
           format_g9(rec.position.x()) + "," + format_g9(rec.position.y()) + "," +
           format_g9(rec.position.z()) + "\n";
  }
  write_text_file(path, out);
}

std::vector<FrameObservations> load_observations_jsonl(const std::string& path) {
  std::vector<std::string> lines = split_lines(read_text_file(path));
  std::vector<FrameObservations> out;
  out.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    ordered_json j = parse_json_text(lines[i], where);
    FrameObservations frame;
    frame.frame_index = require_int(require_key(j, "frame", where), where + "/frame");
    frame.target_id = require_int(require_key(j, "target_id", where), where + "/target_id");
    const ordered_json& rep = require_key(j, "representative", where);
    if (!rep.is_string()) throw ParseError(where + "/representative: expected a string");
    frame.representative = representative_from_string(rep.get<std::string>());
    const ordered_json& entries = require_key(j, "entries", where);
    if (!entries.is_array()) throw ParseError(where + "/entries: expected an array");
    for (size_t k = 0; k < entries.size(); ++k) {
      const std::string epath = where + "/entries/" + std::to_string(k);
      ObservationEntry entry;
      entry.camera_id = require_int(require_key(entries[k], "camera_id", epath),
                                    epath + "/camera_id");
      entry.visible = true;
      entry.pixel.x() = require_number(require_key(entries[k], "u", epath), epath + "/u");
      entry.pixel.y() = require_number(require_key(entries[k], "v", epath), epath + "/v");
      frame.entries.push_back(entry);
    }
    out.push_back(std::move(frame));
  }
  return out;
}

void save_observations_jsonl(const std::string& path,
                             const std::vector<FrameObservations>& observations) {
  std::string out;
  for (const FrameObservations& frame : observations) {
    ordered_json j;
    j["frame"] = frame.frame_index;
    j["target_id"] = frame.target_id;
    j["representative"] = to_string(frame.representative);
    ordered_json entries = ordered_json::array();
    for (const ObservationEntry& entry : frame.entries) {
      if (!entry.visible) continue;
      entries.push_back({{"camera_id", entry.camera_id},
                         {"u", entry.pixel.x()},
                         {"v", entry.pixel.y()}});
    }
    j["entries"] = std::move(entries);
    out += j.dump() + "\n";
  }
  write_text_file(path, out);
}

std::vector<EstimateRecord> load_estimates_csv(const std::string& path) {
  auto rows =
      parse_csv(read_text_file(path), path, "frame,target_id,x,y,z,converged,objective", 7);
  std::vector<EstimateRecord> records;
  records.reserve(rows.size());
  size_t line_no = 1;
  for (const auto& row : rows) {
    ++line_no;
    EstimateRecord rec;
    rec.frame_index = parse_int(row[0], path, line_no);
    rec.target_id = parse_int(row[1], path, line_no);
    rec.position = Position3D(parse_double(row[2], path, line_no),
                              parse_double(row[3], path, line_no),
                              parse_double(row[4], path, line_no));
    const int converged = parse_int(row[5], path, line_no);
    if (converged != 0 && converged != 1)
      throw ParseError(path + ":" + std::to_string(line_no) + ": converged must be 0 or 1");
    rec.converged = converged == 1;
    rec.objective = parse_double(row[6], path, line_no);
    records.push_back(rec);
  }
  return records;
}

void save_estimates_csv(const std::string& path, const std::vector<EstimateRecord>& records) {
  std::string out = "frame,target_id,x,y,z,converged,objective\n";
  for (const EstimateRecord& rec : records) {
    out += std::to_string(rec.frame_index) + "," + std::to_string(rec.target_id) + "," +
           format_g9(rec.position.x()) + "," + format_g9(rec.position.y()) + "," +
           format_g9(rec.position.z()) + "," + (rec.converged ? "1" : "0") + "," +
           format_g9(rec.objective) + "\n";
  }
  write_text_file(path, out);
}

}  // namespace anchorloc
