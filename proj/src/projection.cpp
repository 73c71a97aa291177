#include "ecomann/projection.hpp"

#include <random>

namespace ecomann {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd gauss_newton_update(const Eigen::MatrixXd& j, const Eigen::VectorXd& h, double damping) {
  Eigen::MatrixXd m = j * j.transpose();
  m.diagonal().array() += damping;
  return j.transpose() * m.ldlt().solve(h);
}

}  // namespace

ProjectionResult project(const ImplicitManifold& manifold, const Eigen::Ref<const Eigen::VectorXd>& q0,
                         const ProjectionOptions& options) {
  if (!(options.tol > 0.0)) throw ParameterError("ecomann", "project: tol must be positive");
  if (!q0.allFinite()) throw ProjectionError("ecomann", "project: non-finite start configuration");

  ProjectionResult res;
  res.q = q0;
  Eigen::VectorXd h = manifold.evaluate(res.q);
  if (!all_finite(h)) throw ProjectionError("ecomann", "project: non-finite constraint value at start");
  double r = h.norm();

  // Deterministic generator for the null-space nudge.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  while (res.iters < options.max_iters && r > options.tol) {
    const Eigen::MatrixXd j = manifold.jacobian(res.q);
    const Eigen::VectorXd dq = gauss_newton_update(j, h, options.damping);
    if (!dq.allFinite()) throw ProjectionError("ecomann", "project: non-finite update");

    bool accepted = false;
    if (dq.norm() > 1e-14 * (1.0 + res.q.norm())) {
      double alpha = options.step;
      for (int b = 0; b <= options.max_backtracks; ++b, alpha *= 0.5) {
        const Eigen::VectorXd q_try = res.q - alpha * dq;
        const Eigen::VectorXd h_try = manifold.evaluate(q_try);
        if (all_finite(h_try) && h_try.norm() < r) {
          res.q = q_try;
          h = h_try;
          r = h.norm();
          accepted = true;
          break;
        }
      }
    }

    if (!accepted) {
      // Stationary point of ||h||^2: nudge along the numerical null space of J.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullV);
      const Eigen::VectorXd& sv = svd.singularValues();
      const double cutoff = 1e-8 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
      Eigen::Index rank = 0;
      while (rank < sv.size() && sv(rank) > cutoff) ++rank;
      const Eigen::MatrixXd null_basis = svd.matrixV().rightCols(svd.matrixV().cols() - rank);
      if (null_basis.cols() == 0) break;
      const double scale = 1e-2 * std::max(1.0, res.q.norm());
      for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
        Eigen::VectorXd w(null_basis.cols());
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
        const Eigen::VectorXd dir = null_basis * w;
        const Eigen::VectorXd q_try = res.q + scale * dir / dir.norm();
        const Eigen::VectorXd h_try = manifold.evaluate(q_try);
        if (all_finite(h_try) && h_try.norm() <= r) {
          res.q = q_try;
          h = h_try;
          r = h.norm();
          accepted = true;
        }
      }
      if (!accepted) break;
    }
    if (!res.q.allFinite()) throw ProjectionError("ecomann", "project: non-finite iterate");
    ++res.iters;
  }

  res.residual = r;
  res.converged = r <= options.tol;
  return res;
}

}  // namespace ecomann
