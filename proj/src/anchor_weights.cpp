#include "anchorloc/anchor_weights.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace anchorloc {

AnchorWeights solve_weights(const std::vector<Anchor>& anchors, const Position3D& x_bar,
                            double lambda) {
  if (anchors.empty()) throw EmptyAnchorList("no anchors to weight");
  const int n = static_cast<int>(anchors.size());
  if (n > kMaxAnchorsPerCamera)
    throw InvalidArgument("anchor count " + std::to_string(n) + " exceeds limit " +
                          std::to_string(kMaxAnchorsPerCamera));
  if (lambda < 0.0) throw InvalidArgument("negative ridge strength");

  // Weights are invariant under a common translation of the anchors and
  // x_bar; centering keeps the KKT system well scaled far from the origin.
  Position3D mean = Position3D::Zero();
  for (const auto& a : anchors) mean += a.world;
  mean /= n;

  Eigen::MatrixXd A(3, n);
  for (int j = 0; j < n; ++j) A.col(j) = anchors[j].world - mean;
  const Position3D target = x_bar - mean;

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) = A.transpose() * A;
  kkt.topLeftCorner(n, n).diagonal().array() += lambda;
  kkt.topRightCorner(n, 1).setOnes();
  kkt.bottomLeftCorner(1, n).setOnes();

  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = A.transpose() * target;
  rhs(n) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible())
    throw SingularSystem("weight system singular (degenerate anchor geometry, or "
                         "lambda = 0 with more than 4 anchors)");
  Eigen::VectorXd sol = lu.solve(rhs);
  // one refinement step; the constraint row must hold to 1e-10
  sol += lu.solve(rhs - kkt * sol);

  const double constraint_gap = std::abs(sol.head(n).sum() - 1.0);
  if (!sol.allFinite() || constraint_gap > 1e-10)
    throw SingularSystem("weight system too ill-conditioned, constraint residual " +
                         std::to_string(constraint_gap));

  AnchorWeights out;
  out.camera_id = anchors.front().camera_id;
  out.lambda_used = lambda;
  out.weights.reserve(n);
  for (int j = 0; j < n; ++j) out.weights.emplace_back(anchors[j].anchor_id, sol(j));
  return out;
}

AnchorSet::AnchorSet(const std::vector<Anchor>& anchors) {
  for (const auto& a : anchors) by_camera_[a.camera_id].push_back(a);
  for (auto& [id, list] : by_camera_) {
    std::sort(list.begin(), list.end(),
              [](const Anchor& lhs, const Anchor& rhs) { return lhs.anchor_id < rhs.anchor_id; });
  }
}

const std::vector<Anchor>* AnchorSet::find(int camera_id) const {
  auto it = by_camera_.find(camera_id);
  return it == by_camera_.end() ? nullptr : &it->second;
}

AnchorSet AnchorSet::limited(int limit) const {
  if (limit <= 0) return *this;
  AnchorSet out;
  for (const auto& [id, list] : by_camera_) {
    auto& dst = out.by_camera_[id];
    dst.assign(list.begin(), list.begin() + std::min<size_t>(list.size(), limit));
  }
  return out;
}

}  // namespace anchorloc
