#include "anchorloc/evaluation.hpp"

#include <cmath>
#include <string>

namespace anchorloc {

namespace {

double row_distance(const Position3D& a, const Position3D& b, int n_visible) {
  if (n_visible == 1) return (a.head<2>() - b.head<2>()).norm();
  return (a - b).norm();
}

struct Accumulator {
  int n = 0;
  int improved = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double distance, bool was_improved) {
    ++n;
    sum += distance;
    sum_sq += distance * distance;
    if (was_improved) ++improved;
  }

  MetricsBreakdown finish() const {
    MetricsBreakdown out;
    out.n_frames = n;
    if (n == 0) return out;
    out.average_distance = sum / n;
    const double var = std::max(0.0, sum_sq / n - out.average_distance * out.average_distance);
    out.distance_std = std::sqrt(var);
    out.improvement_ratio = static_cast<double>(improved) / n;
    return out;
  }
};

}  // namespace

MetricsReport evaluate(const std::vector<EvalRow>& rows) {
  Accumulator all;
  Accumulator single, multi;
  std::map<int, Accumulator> per_target;

  for (const auto& row : rows) {
    const double d_est = row_distance(row.estimate, row.truth, row.n_visible);
    const double d_init = row_distance(row.initial, row.truth, row.n_visible);
    const bool improved = d_est < d_init;
    all.add(d_est, improved);
    per_target[row.target_id].add(d_est, improved);
    (row.n_visible == 1 ? single : multi).add(d_est, improved);
  }

  MetricsReport report;
  MetricsBreakdown overall = all.finish();
  report.n_frames = overall.n_frames;
  report.average_distance = overall.average_distance;
  report.distance_std = overall.distance_std;
  report.improvement_ratio = overall.improvement_ratio;
  for (const auto& [target, acc] : per_target) report.per_target[target] = acc.finish();
  report.single_camera = single.finish();
  report.multi_camera = multi.finish();
  return report;
}

MetricsReport evaluate(const std::vector<Position3D>& estimates,
                       const std::vector<Position3D>& truth,
                       const std::vector<Position3D>& initials) {
  if (estimates.size() != truth.size() || estimates.size() != initials.size())
    throw LengthMismatch("evaluate needs aligned columns, got " +
                         std::to_string(estimates.size()) + "/" +
                         std::to_string(truth.size()) + "/" +
                         std::to_string(initials.size()));
  std::vector<EvalRow> rows(estimates.size());
  for (size_t i = 0; i < estimates.size(); ++i) {
    rows[i].estimate = estimates[i];
    rows[i].truth = truth[i];
    rows[i].initial = initials[i];
  }
  return evaluate(rows);
}

namespace {

bool pixel_in_image(const Pixel2D& pixel, const CameraParams& camera) {
  return pixel.x() >= 0.0 && pixel.x() <= camera.image_size.x() &&
         pixel.y() >= 0.0 && pixel.y() <= camera.image_size.y();
}

// angle at `observer` between the probe point seen under `other` and the
// observer's own ray, radians
double one_direction(const CameraParams& observer, const CameraParams& other,
                     const Pixel2D& probe, const AngularErrorOptions& options) {
  Eigen::Vector3d point =
      other.center() + options.probe_depth * back_project_ray(other, probe, options.camera);
  Eigen::Vector3d to_point = point - observer.center();
  Eigen::Vector3d ray = back_project_ray(observer, probe, options.camera);
  const double cross = to_point.cross(ray).norm();
  const double dot = to_point.dot(ray);
  return std::atan2(cross, dot);
}

}  // namespace

double angular_error_deg(const CameraParams& a, const CameraParams& b,
                         const std::vector<Pixel2D>& probes,
                         const AngularErrorOptions& options) {
  double sum = 0.0;
  int used = 0;
  for (const auto& probe : probes) {
    if (!pixel_in_image(probe, a) || !pixel_in_image(probe, b)) continue;
    try {
      const double forward = one_direction(a, b, probe, options);
      const double backward = one_direction(b, a, probe, options);
      sum += 0.5 * (forward + backward);
      ++used;
    } catch (const NoConvergence&) {
      continue;
    }
  }
  if (used == 0) throw NoValidProbes("no probe pixel valid in both calibrations");
  return rad_to_deg(sum / used);
}

std::vector<Pixel2D> default_probe_grid(const CameraParams& camera) {
  std::vector<Pixel2D> probes;
  probes.reserve(25);
  const double w = camera.image_size.x();
  const double h = camera.image_size.y();
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      probes.emplace_back(w * (0.1 + 0.2 * i), h * (0.1 + 0.2 * j));
    }
  }
  return probes;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw LengthMismatch("slope fit needs aligned samples");
  if (x.size() < 2) throw InvalidArgument("slope fit needs at least two samples");
  const int n = static_cast<int>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw InvalidArgument("slope fit needs positive samples");
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw InvalidArgument("slope fit abscissae coincide");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace anchorloc
