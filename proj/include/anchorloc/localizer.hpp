#pragma once

#include "anchorloc/anchor_weights.hpp"
#include "anchorloc/camera_model.hpp"
#include "anchorloc/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anchorloc {

// Nominal: raw reprojection residuals. Anchor: residuals shifted per camera
// by the weighted anchor reprojection-error combination, which cancels the
// first-order effect of camera parameter error near the anchor combination.
enum class Mode { Nominal, Anchor };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct SolverConfig {
  int max_iters = 50;
  double step_tol = 1e-6;    // meters, accepted-step norm
  double grad_tol = 1e-8;    // inf-norm of the objective gradient 2 J^T r
  double damping_init = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.5;
  // Height to pin when a frame has exactly one visible camera; such frames
  // are solved over (x, y) only and require this to be set.
  std::optional<double> fixed_height;
};

struct SmoothingConfig {
  int batch_size = 1;   // window length T; <= 1 disables coupling
  double rho = 60.0;    // px^2 / m^2
};

struct CameraResidual {
  int camera_id = -1;
  Eigen::Vector2d residual = Eigen::Vector2d::Zero();  // predicted - observed (- correction)
};

struct LocalizationResult {
  Position3D position = Position3D::Zero();
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;  // sum of squared pixel residuals of this frame
  Mode mode = Mode::Nominal;
  std::vector<CameraResidual> per_camera_residuals;
};

// Weighted anchor reprojection error of one camera under its current
// parameters: sum_j w_j (project(a_j) - observed_j). Weight entries are
// matched to anchors by anchor_id; MissingWeights when an id is absent.
Eigen::Vector2d anchor_correction(const CameraParams& camera,
                                  const std::vector<Anchor>& anchors,
                                  const AnchorWeights& weights,
                                  const CameraModelOptions& options = {});

// Stacked 2-vectors over visible cameras in entry order.
Eigen::VectorXd residual_nominal(const Position3D& position,
                                 const FrameObservations& observations,
                                 const std::vector<CameraParams>& cameras,
                                 const CameraModelOptions& options = {});

// Same stacking with the per-camera anchor correction subtracted. Weights are
// looked up by camera id; MissingWeights when a visible camera has none.
Eigen::VectorXd residual_anchor(const Position3D& position,
                                const FrameObservations& observations,
                                const std::vector<CameraParams>& cameras,
                                const AnchorSet& anchors,
                                const std::map<int, AnchorWeights>& weights,
                                const CameraModelOptions& options = {});

// Damped Gauss-Newton on the squared residual norm. In Anchor mode the
// weights are solved once at `init` and the per-camera corrections stay
// fixed through the iteration. Accepted steps strictly decrease the
// objective; PointBehindCamera during a trial step rejects the step and
// raises damping instead of failing the solve.
LocalizationResult solve_frame(const FrameObservations& observations,
                               const std::vector<CameraParams>& cameras,
                               const AnchorSet& anchors,
                               Mode mode,
                               const Position3D& init,
                               const SolverConfig& solver = {},
                               double lambda = kDefaultWeightLambda,
                               const CameraModelOptions& options = {});

// Joint solve of a window of consecutive same-target frames with the
// first-difference smoothness penalty rho * sum_t |x_t - x_{t-1}|^2 added to
// the reprojection objective. Frames must be in strictly increasing frame
// order; inits must align with frames. The block-tridiagonal normal
// equations are eliminated directly. final_objective of each result is that
// frame's reprojection term only.
std::vector<LocalizationResult> solve_batch(const std::vector<FrameObservations>& frames,
                                            const std::vector<CameraParams>& cameras,
                                            const AnchorSet& anchors,
                                            Mode mode,
                                            const std::vector<Position3D>& inits,
                                            const SmoothingConfig& smoothing,
                                            const SolverConfig& solver = {},
                                            double lambda = kDefaultWeightLambda,
                                            const CameraModelOptions& options = {});

}  // namespace anchorloc
