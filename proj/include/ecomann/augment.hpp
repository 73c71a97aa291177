#pragma once

// Off-manifold augmentation along estimated normal spaces, plus the pair
// lists consumed by the siamese losses.

#include "ecomann/common.hpp"
#include "ecomann/lin_geom.hpp"

#include <cstdint>

namespace ecomann {

struct AugmentedPoint {
  Configuration point;
  Eigen::Index parent = 0;
  int level = 0;                // 0 for the on-manifold point itself
  Eigen::VectorXd direction;    // unit normal direction, empty at level 0
  double norm_label = 0.0;      // level * epsilon
};

struct FractionPair {
  std::size_t far = 0;   // q + i eps u
  std::size_t near = 0;  // q + (a/b) i eps u
  double ratio = 0.5;    // a/b
};

struct SiamesePairs {
  std::vector<std::pair<std::size_t, std::size_t>> reflection;  // (q + i eps u, q - i eps u)
  std::vector<FractionPair> fraction;
  std::vector<std::pair<std::size_t, std::size_t>> similar;  // same weights w, neighbouring parents
};

struct AugmentOptions {
  int levels = 7;
  int dirs_per_point = 2;
  int k = 0;  // k-NN graph for similar pairs; 0 selects default_k(d)
  std::uint64_t seed = 0;
};

struct AugmentedSet {
  std::vector<AugmentedPoint> points;  // the first N entries are the on-manifold points, in order
  SiamesePairs pairs;
  std::size_t rejected = 0;
};

/// sqrt of the mean tangent-space eigenvalue over all frames.
double compute_epsilon(const std::vector<LocalFrame>& frames);

/// Emits q +/- i eps u for i = 1..levels along dirs_per_point directions per
/// point, where u = normalize(V_N w) and w ~ N(0, I) is drawn once per
/// direction slot and shared by all points. A candidate whose nearest on-manifold point
/// is not its parent is rejected. For l = 1 the normal space holds only +/- v,
/// which the reflections already cover, so a single direction is used.
AugmentedSet augment_dataset(const PointMatrix& on_manifold, const std::vector<Eigen::MatrixXd>& normals, double epsilon,
                             const AugmentOptions& options = {});

}  // namespace ecomann
