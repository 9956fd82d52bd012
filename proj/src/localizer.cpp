#include "anchorloc/localizer.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>
#include <unordered_map>

namespace anchorloc {

std::string to_string(Mode mode) {
  return mode == Mode::Nominal ? "NOMINAL" : "ANCHOR";
}

Mode mode_from_string(const std::string& name) {
  if (name == "NOMINAL") return Mode::Nominal;
  if (name == "ANCHOR") return Mode::Anchor;
  throw ParseError("unknown mode '" + name + "', expected NOMINAL or ANCHOR");
}

Eigen::Vector2d anchor_correction(const CameraParams& camera,
                                  const std::vector<Anchor>& anchors,
                                  const AnchorWeights& weights,
                                  const CameraModelOptions& options) {
  std::unordered_map<int, const Anchor*> by_id;
  by_id.reserve(anchors.size());
  for (const auto& a : anchors) by_id[a.anchor_id] = &a;

  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& [anchor_id, weight] : weights.weights) {
    auto it = by_id.find(anchor_id);
    if (it == by_id.end())
      throw MissingWeights("weight references anchor " + std::to_string(anchor_id) +
                           " absent from camera " + std::to_string(camera.id));
    sum += weight * (project(it->second->world, camera, options) - it->second->observed_pixel);
  }
  return sum;
}

namespace {

// One frame reduced to visible cameras; target = observed pixel plus the
// fixed anchor correction, so residual rows are predicted - target.
struct PreparedFrame {
  std::vector<const CameraParams*> cameras;
  std::vector<int> camera_ids;
  std::vector<Pixel2D> targets;
  bool fix_z = false;
  double fixed_z = 0.0;

  int free_dims() const { return fix_z ? 2 : 3; }
};

PreparedFrame prepare_frame(const FrameObservations& observations,
                            const std::vector<CameraParams>& cameras,
                            const std::unordered_map<int, Eigen::Vector2d>* corrections) {
  PreparedFrame out;
  for (const auto& entry : observations.entries) {
    if (!entry.visible) continue;
    const CameraParams* camera = find_camera(cameras, entry.camera_id);
    if (camera == nullptr)
      throw InvalidArgument("observation references unknown camera " +
                            std::to_string(entry.camera_id));
    Pixel2D target = entry.pixel;
    if (corrections != nullptr) {
      auto it = corrections->find(entry.camera_id);
      if (it == corrections->end())
        throw MissingWeights("no anchor weights for camera " +
                             std::to_string(entry.camera_id));
      target += it->second;
    }
    out.cameras.push_back(camera);
    out.camera_ids.push_back(entry.camera_id);
    out.targets.push_back(target);
  }
  return out;
}

struct FrameEval {
  Eigen::VectorXd r;
  Eigen::MatrixXd J;  // 2m x free_dims
  double objective = 0.0;
};

FrameEval evaluate_frame(const PreparedFrame& frame, const Position3D& x,
                         const CameraModelOptions& options, bool with_jacobian) {
  const int m = static_cast<int>(frame.cameras.size());
  FrameEval out;
  out.r.resize(2 * m);
  if (with_jacobian) out.J.resize(2 * m, frame.free_dims());
  for (int i = 0; i < m; ++i) {
    if (with_jacobian) {
      ProjectionJacobians jac = jacobians(x, *frame.cameras[i], options);
      Pixel2D predicted = project(x, *frame.cameras[i], options);
      out.r.segment<2>(2 * i) = predicted - frame.targets[i];
      out.J.block(2 * i, 0, 2, frame.free_dims()) =
          jac.d_pixel_d_x.leftCols(frame.free_dims());
    } else {
      out.r.segment<2>(2 * i) = project(x, *frame.cameras[i], options) - frame.targets[i];
    }
  }
  out.objective = out.r.squaredNorm();
  return out;
}

struct WindowEval {
  std::vector<FrameEval> frames;
  double total = 0.0;  // reprojection terms plus the smoothness penalty
};

WindowEval evaluate_window(const std::vector<PreparedFrame>& frames,
                           const std::vector<Position3D>& xs, double rho,
                           const CameraModelOptions& options, bool with_jacobian) {
  WindowEval out;
  out.frames.reserve(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    out.frames.push_back(evaluate_frame(frames[t], xs[t], options, with_jacobian));
    out.total += out.frames.back().objective;
  }
  if (rho > 0.0) {
    for (size_t t = 1; t < frames.size(); ++t)
      out.total += rho * (xs[t] - xs[t - 1]).squaredNorm();
  }
  return out;
}

// Gauss-Newton step on the window objective: block-tridiagonal normal
// equations (H + mu I) delta = -g eliminated by a forward block sweep.
// Returns false when the elimination produces a non-finite step.
bool window_step(const std::vector<PreparedFrame>& frames, const WindowEval& eval,
                 const std::vector<Position3D>& xs, double rho, double mu,
                 std::vector<Eigen::VectorXd>& delta) {
  const int T = static_cast<int>(frames.size());
  std::vector<Eigen::MatrixXd> diag(T);
  std::vector<Eigen::VectorXd> rhs(T);

  for (int t = 0; t < T; ++t) {
    const int n = frames[t].free_dims();
    diag[t] = eval.frames[t].J.transpose() * eval.frames[t].J;
    rhs[t] = -(eval.frames[t].J.transpose() * eval.frames[t].r);
    const int touching = (t > 0 ? 1 : 0) + (t + 1 < T ? 1 : 0);
    diag[t].diagonal().array() += rho * touching + mu;
    if (t > 0)
      rhs[t] -= rho * (xs[t] - xs[t - 1]).head(n);
    if (t + 1 < T)
      rhs[t] += rho * (xs[t + 1] - xs[t]).head(n);
  }

  // off-diagonal blocks are -rho on the coordinates free in both frames
  auto off_block = [&](int t) {
    return Eigen::MatrixXd(-rho * Eigen::MatrixXd::Identity(frames[t].free_dims(),
                                                            frames[t + 1].free_dims()));
  };

  delta.assign(T, Eigen::VectorXd());
  std::vector<Eigen::MatrixXd> pivot(T);
  std::vector<Eigen::VectorXd> carried(T);
  pivot[0] = diag[0];
  carried[0] = rhs[0];
  for (int t = 1; t < T; ++t) {
    Eigen::MatrixXd b = off_block(t - 1);
    Eigen::MatrixXd gain = pivot[t - 1].ldlt().solve(b).transpose();
    pivot[t] = diag[t] - gain * b;
    carried[t] = rhs[t] - gain * carried[t - 1];
  }
  delta[T - 1] = pivot[T - 1].ldlt().solve(carried[T - 1]);
  for (int t = T - 2; t >= 0; --t)
    delta[t] = pivot[t].ldlt().solve(carried[t] - off_block(t) * delta[t + 1]);

  for (const auto& d : delta) {
    if (!d.allFinite()) return false;
  }
  return true;
}

std::vector<LocalizationResult> solve_window(const std::vector<PreparedFrame>& frames,
                                             const std::vector<Position3D>& inits,
                                             double rho, Mode mode,
                                             const SolverConfig& solver,
                                             const CameraModelOptions& options) {
  const int T = static_cast<int>(frames.size());
  std::vector<Position3D> xs(inits.begin(), inits.end());
  for (int t = 0; t < T; ++t) {
    if (frames[t].fix_z) xs[t].z() = frames[t].fixed_z;
  }

  WindowEval eval = evaluate_window(frames, xs, rho, options, true);
  double mu = solver.damping_init;
  bool converged = false;
  int accepted_steps = 0;

  for (int iter = 0; iter < solver.max_iters; ++iter) {
    double grad_inf = 0.0;
    for (int t = 0; t < T; ++t) {
      const int n = frames[t].free_dims();
      Eigen::VectorXd g = 2.0 * (eval.frames[t].J.transpose() * eval.frames[t].r);
      if (rho > 0.0) {
        if (t > 0) g += 2.0 * rho * (xs[t] - xs[t - 1]).head(n);
        if (t + 1 < T) g -= 2.0 * rho * (xs[t + 1] - xs[t]).head(n);
      }
      grad_inf = std::max(grad_inf, g.lpNorm<Eigen::Infinity>());
    }
    if (grad_inf < solver.grad_tol) {
      converged = true;
      break;
    }

    // inner damping loop: reject non-descending or invalid trials
    bool accepted = false;
    double step_norm_sq = 0.0;
    for (int tries = 0; tries < 60 && mu < 1e15; ++tries) {
      std::vector<Eigen::VectorXd> delta;
      bool ok = window_step(frames, eval, xs, rho, mu, delta);
      std::vector<Position3D> trial = xs;
      if (ok) {
        for (int t = 0; t < T; ++t)
          trial[t].head(frames[t].free_dims()) += delta[t];
      }
      if (ok) {
        try {
          WindowEval trial_eval = evaluate_window(frames, trial, rho, options, true);
          if (trial_eval.total < eval.total) {
            step_norm_sq = 0.0;
            for (const auto& d : delta) step_norm_sq += d.squaredNorm();
            xs = std::move(trial);
            eval = std::move(trial_eval);
            mu *= solver.damping_down;
            accepted = true;
            ++accepted_steps;
            break;
          }
        } catch (const PointBehindCamera&) {
          // trial left the valid region; treat like a failed step
        }
      }
      mu = mu > 0.0 ? mu * solver.damping_up : 1e-8;
    }
    if (!accepted) break;
    if (std::sqrt(step_norm_sq) < solver.step_tol) {
      converged = true;
      break;
    }
  }

  std::vector<LocalizationResult> results(T);
  for (int t = 0; t < T; ++t) {
    LocalizationResult& res = results[t];
    res.position = xs[t];
    res.converged = converged;
    res.iterations = accepted_steps;
    res.final_objective = eval.frames[t].objective;
    res.mode = mode;
    const int m = static_cast<int>(frames[t].cameras.size());
    res.per_camera_residuals.resize(m);
    for (int i = 0; i < m; ++i) {
      res.per_camera_residuals[i].camera_id = frames[t].camera_ids[i];
      res.per_camera_residuals[i].residual = eval.frames[t].r.segment<2>(2 * i);
    }
  }
  return results;
}

std::unordered_map<int, Eigen::Vector2d> build_corrections(
    const PreparedFrame& skeleton, const AnchorSet& anchors, const Position3D& x_bar,
    double lambda, const CameraModelOptions& options) {
  std::unordered_map<int, Eigen::Vector2d> corrections;
  for (size_t i = 0; i < skeleton.cameras.size(); ++i) {
    const int camera_id = skeleton.camera_ids[i];
    const std::vector<Anchor>* list = anchors.find(camera_id);
    if (list == nullptr || list->empty())
      throw MissingWeights("camera " + std::to_string(camera_id) + " has no anchors");
    AnchorWeights w = solve_weights(*list, x_bar, lambda);
    corrections[camera_id] = anchor_correction(*skeleton.cameras[i], *list, w, options);
  }
  return corrections;
}

PreparedFrame prepare_for_solve(const FrameObservations& observations,
                                const std::vector<CameraParams>& cameras,
                                const AnchorSet& anchors, Mode mode,
                                const Position3D& init, const SolverConfig& solver,
                                double lambda, const CameraModelOptions& options) {
  if (observations.visible_count() == 0)
    throw NoVisibleCamera("frame " + std::to_string(observations.frame_index) +
                          " has no visible observation");

  PreparedFrame frame;
  if (mode == Mode::Anchor) {
    PreparedFrame skeleton = prepare_frame(observations, cameras, nullptr);
    auto corrections = build_corrections(skeleton, anchors, init, lambda, options);
    frame = prepare_frame(observations, cameras, &corrections);
  } else {
    frame = prepare_frame(observations, cameras, nullptr);
  }

  if (frame.cameras.size() == 1) {
    if (!solver.fixed_height)
      throw InvalidArgument("single-camera frame " +
                            std::to_string(observations.frame_index) +
                            " requires SolverConfig::fixed_height");
    frame.fix_z = true;
    frame.fixed_z = *solver.fixed_height;
  }
  return frame;
}

}  // namespace

Eigen::VectorXd residual_nominal(const Position3D& position,
                                 const FrameObservations& observations,
                                 const std::vector<CameraParams>& cameras,
                                 const CameraModelOptions& options) {
  PreparedFrame frame = prepare_frame(observations, cameras, nullptr);
  return evaluate_frame(frame, position, options, false).r;
}

Eigen::VectorXd residual_anchor(const Position3D& position,
                                const FrameObservations& observations,
                                const std::vector<CameraParams>& cameras,
                                const AnchorSet& anchors,
                                const std::map<int, AnchorWeights>& weights,
                                const CameraModelOptions& options) {
  std::unordered_map<int, Eigen::Vector2d> corrections;
  for (const auto& entry : observations.entries) {
    if (!entry.visible) continue;
    const CameraParams* camera = find_camera(cameras, entry.camera_id);
    if (camera == nullptr)
      throw InvalidArgument("observation references unknown camera " +
                            std::to_string(entry.camera_id));
    auto wit = weights.find(entry.camera_id);
    if (wit == weights.end())
      throw MissingWeights("no anchor weights for camera " +
                           std::to_string(entry.camera_id));
    const std::vector<Anchor>* list = anchors.find(entry.camera_id);
    if (list == nullptr)
      throw MissingWeights("camera " + std::to_string(entry.camera_id) +
                           " has no anchors");
    corrections[entry.camera_id] = anchor_correction(*camera, *list, wit->second, options);
  }
  PreparedFrame frame = prepare_frame(observations, cameras, &corrections);
  return evaluate_frame(frame, position, options, false).r;
}

LocalizationResult solve_frame(const FrameObservations& observations,
                               const std::vector<CameraParams>& cameras,
                               const AnchorSet& anchors, Mode mode,
                               const Position3D& init, const SolverConfig& solver,
                               double lambda, const CameraModelOptions& options) {
  PreparedFrame frame =
      prepare_for_solve(observations, cameras, anchors, mode, init, solver, lambda, options);
  return solve_window({frame}, {init}, 0.0, mode, solver, options).front();
}

std::vector<LocalizationResult> solve_batch(const std::vector<FrameObservations>& frames,
                                            const std::vector<CameraParams>& cameras,
                                            const AnchorSet& anchors, Mode mode,
                                            const std::vector<Position3D>& inits,
                                            const SmoothingConfig& smoothing,
                                            const SolverConfig& solver, double lambda,
                                            const CameraModelOptions& options) {
  if (frames.empty()) throw InvalidArgument("empty frame window");
  if (frames.size() != inits.size())
    throw LengthMismatch("window has " + std::to_string(frames.size()) +
                         " frames but " + std::to_string(inits.size()) + " inits");
  for (size_t t = 1; t < frames.size(); ++t) {
    if (frames[t].target_id != frames.front().target_id)
      throw InvalidArgument("window mixes targets " +
                            std::to_string(frames.front().target_id) + " and " +
                            std::to_string(frames[t].target_id));
    if (frames[t].frame_index <= frames[t - 1].frame_index)
      throw InvalidArgument("window frames not in increasing order at index " +
                            std::to_string(frames[t].frame_index));
  }

  std::vector<PreparedFrame> prepared;
  prepared.reserve(frames.size());
  for (size_t t = 0; t < frames.size(); ++t)
    prepared.push_back(prepare_for_solve(frames[t], cameras, anchors, mode, inits[t],
                                         solver, lambda, options));
  const double rho = frames.size() > 1 ? smoothing.rho : 0.0;
  return solve_window(prepared, inits, rho, mode, solver, options);
}

}  // namespace anchorloc
