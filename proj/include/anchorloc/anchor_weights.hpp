#pragma once

#include "anchorloc/errors.hpp"
#include "anchorloc/types.hpp"

#include <map>
#include <vector>

namespace anchorloc {

constexpr int kMaxAnchorsPerCamera = 32;
constexpr double kDefaultWeightLambda = 1e-2;

// Affine combination weights reproducing x_bar from the camera's anchor
// positions: minimize |sum_j w_j a_j - x_bar|^2 + lambda |w|^2 subject to
// sum_j w_j = 1, via the KKT system
//
//   [ A^T A + lambda I   1 ] [ w  ]   [ A^T x_bar ]
//   [ 1^T                0 ] [ mu ] = [ 1         ]
//
// with A the matrix of anchor positions as columns. Anchors are centered
// before the solve (weights are affine-invariant, conditioning is not).
// lambda = 0 is honored; note the system is singular at lambda = 0 whenever
// more than 4 anchors are present or the anchor set is affinely degenerate.
//
// Throws EmptyAnchorList, InvalidArgument (too many anchors, lambda < 0),
// SingularSystem.
AnchorWeights solve_weights(const std::vector<Anchor>& anchors,
                            const Position3D& x_bar,
                            double lambda = kDefaultWeightLambda);

// Anchors grouped per camera, ordered by anchor_id within each camera.
class AnchorSet {
 public:
  AnchorSet() = default;
  explicit AnchorSet(const std::vector<Anchor>& anchors);

  // nullptr when the camera has no anchors
  const std::vector<Anchor>* find(int camera_id) const;

  // Keeps the first `limit` anchors (by anchor_id) of every camera;
  // limit <= 0 keeps everything.
  AnchorSet limited(int limit) const;

  bool empty() const { return by_camera_.empty(); }
  const std::map<int, std::vector<Anchor>>& by_camera() const { return by_camera_; }

 private:
  std::map<int, std::vector<Anchor>> by_camera_;
};

}  // namespace anchorloc
