#pragma once

#include "anchorloc/errors.hpp"
#include "anchorloc/evaluation.hpp"
#include "anchorloc/localizer.hpp"

#include <json.hpp>

#include <string>

// Internal helpers shared by the file-format and pipeline translation units.
namespace anchorloc {

using ordered_json = nlohmann::ordered_json;

inline ordered_json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

inline const ordered_json& require_key(const ordered_json& obj, const char* key,
                                       const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing required key '" + key + "'");
  return *it;
}

inline double require_number(const ordered_json& value, const std::string& path) {
  if (!value.is_number()) throw ParseError(path + ": expected a number");
  return value.get<double>();
}

inline int require_int(const ordered_json& value, const std::string& path) {
  if (!value.is_number_integer()) throw ParseError(path + ": expected an integer");
  return value.get<int>();
}

inline std::string require_string(const ordered_json& value, const std::string& path) {
  if (!value.is_string()) throw ParseError(path + ": expected a string");
  return value.get<std::string>();
}

// missing-key tolerant accessors for optional config fields
inline double number_or(const ordered_json& obj, const char* key, double fallback,
                        const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_number(obj[key], path + "/" + key);
}

inline int int_or(const ordered_json& obj, const char* key, int fallback,
                  const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_int(obj[key], path + "/" + key);
}

inline std::string string_or(const ordered_json& obj, const char* key,
                             const std::string& fallback, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_string(obj[key], path + "/" + key);
}

inline SolverConfig parse_solver_json(const ordered_json& obj, const std::string& path) {
  SolverConfig solver;
  solver.max_iters = int_or(obj, "max_iters", solver.max_iters, path);
  solver.step_tol = number_or(obj, "step_tol", solver.step_tol, path);
  solver.grad_tol = number_or(obj, "grad_tol", solver.grad_tol, path);
  solver.damping_init = number_or(obj, "damping_init", solver.damping_init, path);
  solver.damping_up = number_or(obj, "damping_up", solver.damping_up, path);
  solver.damping_down = number_or(obj, "damping_down", solver.damping_down, path);
  return solver;
}

inline ordered_json breakdown_to_json(const MetricsBreakdown& b) {
  return ordered_json{{"n_frames", b.n_frames},
                      {"average_distance", b.average_distance},
                      {"distance_std", b.distance_std},
                      {"improvement_ratio", b.improvement_ratio}};
}

inline ordered_json metrics_to_json(const MetricsReport& report) {
  ordered_json per_target = ordered_json::object();
  for (const auto& [target, breakdown] : report.per_target)
    per_target[std::to_string(target)] = breakdown_to_json(breakdown);
  return ordered_json{{"n_frames", report.n_frames},
                      {"average_distance", report.average_distance},
                      {"distance_std", report.distance_std},
                      {"improvement_ratio", report.improvement_ratio},
                      {"per_target", std::move(per_target)},
                      {"single_camera", breakdown_to_json(report.single_camera)},
                      {"multi_camera", breakdown_to_json(report.multi_camera)}};
}

inline MetricsBreakdown breakdown_from_json(const ordered_json& j, const std::string& path) {
  MetricsBreakdown b;
  b.n_frames = require_int(require_key(j, "n_frames", path), path + "/n_frames");
  b.average_distance =
      require_number(require_key(j, "average_distance", path), path + "/average_distance");
  b.distance_std =
      require_number(require_key(j, "distance_std", path), path + "/distance_std");
  b.improvement_ratio = require_number(require_key(j, "improvement_ratio", path),
                                       path + "/improvement_ratio");
  return b;
}

inline MetricsReport metrics_from_json(const ordered_json& j, const std::string& path) {
  MetricsReport report;
  MetricsBreakdown overall = breakdown_from_json(j, path);
  report.n_frames = overall.n_frames;
  report.average_distance = overall.average_distance;
  report.distance_std = overall.distance_std;
  report.improvement_ratio = overall.improvement_ratio;
  const ordered_json& per_target = require_key(j, "per_target", path);
  for (auto it = per_target.begin(); it != per_target.end(); ++it)
    report.per_target[std::stoi(it.key())] =
        breakdown_from_json(it.value(), path + "/per_target/" + it.key());
  report.single_camera =
      breakdown_from_json(require_key(j, "single_camera", path), path + "/single_camera");
  report.multi_camera =
      breakdown_from_json(require_key(j, "multi_camera", path), path + "/multi_camera");
  return report;
}

}  // namespace anchorloc
