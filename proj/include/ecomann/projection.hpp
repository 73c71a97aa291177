#pragma once

#include "ecomann/manifold.hpp"

namespace ecomann {

struct ProjectionOptions {
  double tol = 1e-3;
  int max_iters = 200;
  double step = 1.0;
  double damping = 1e-8;  // Tikhonov term added to J J^T
  int max_backtracks = 10;
};

struct ProjectionResult {
  Configuration q;
  bool converged = false;
  int iters = 0;
  double residual = 0.0;  // ||h(q)|| at the returned iterate
};

/// Damped Gauss-Newton descent of ||h|| onto the zero level set:
///   q <- q - step * J^T (J J^T + damping I)^-1 h(q)
/// with backtracking so accepted iterates strictly decrease ||h||. When the
/// update vanishes away from the manifold (a critical point of ||h||, e.g. on
/// the symmetry axis of a circle) the iterate is nudged along null(J).
/// Returns the last iterate whether or not it converged.
ProjectionResult project(const ImplicitManifold& manifold, const Eigen::Ref<const Eigen::VectorXd>& q0,
                         const ProjectionOptions& options = {});

}  // namespace ecomann
