#include "ecomann/losses.hpp"

namespace ecomann {

double loss_norm(const Eigen::VectorXd& h, double norm_label) {
  const double r = h.norm() - norm_label;
  return r * r;
}

Eigen::VectorXd grad_loss_norm(const Eigen::VectorXd& h, double norm_label) {
  const double n = h.norm();
  if (n <= 1e-12) return Eigen::VectorXd::Zero(h.size());
  return 2.0 * (n - norm_label) / n * h;
}

double loss_reflection(const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus) {
  return (h_plus + h_minus).squaredNorm();
}

bool fraction_pair_valid(const Eigen::VectorXd& h_far, const Eigen::VectorXd& h_near) {
  return h_far.norm() > kFractionMinNorm && h_near.norm() > kFractionMinNorm;
}

double loss_fraction(const Eigen::VectorXd& h_far, const Eigen::VectorXd& h_near) {
  if (!fraction_pair_valid(h_far, h_near)) throw ParameterError("ecomann", "loss_fraction: output norm too small");
  return (h_far / h_far.norm() - h_near / h_near.norm()).squaredNorm();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> grad_loss_fraction(const Eigen::VectorXd& h_far,
                                                               const Eigen::VectorXd& h_near) {
  const double nf = h_far.norm(), nn = h_near.norm();
  const Eigen::VectorXd uf = h_far / nf, un = h_near / nn;
  const Eigen::VectorXd diff = 2.0 * (uf - un);
  // d(h/||h||)/dh = (I - u u^T) / ||h||
  Eigen::VectorXd gf = (diff - uf * uf.dot(diff)) / nf;
  Eigen::VectorXd gn = -(diff - un * un.dot(diff)) / nn;
  return {std::move(gf), std::move(gn)};
}

double loss_similar(const Eigen::VectorXd& h_a, const Eigen::VectorXd& h_c) { return (h_a - h_c).squaredNorm(); }

AlignmentTerm alignment_term(const Eigen::MatrixXd& jac, const Eigen::MatrixXd& normal_basis, double damping) {
  if (!(damping > 0.0)) throw ParameterError("ecomann", "alignment damping must be positive");
  if (normal_basis.rows() != jac.cols()) throw ParameterError("ecomann", "alignment: basis/Jacobian dimension mismatch");
  const Eigen::MatrixXd proj = normal_basis * normal_basis.transpose();
  double lambda = damping;
  for (int attempt = 0; attempt <= 3; ++attempt, lambda *= 10.0) {
    Eigen::MatrixXd m = jac * jac.transpose();
    m.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) continue;
    const Eigen::MatrixXd a = llt.solve(jac);        // M^-1 J, l x d
    const Eigen::MatrixXd ap = a * proj;              // M^-1 J P
    const Eigen::MatrixXd b = ap * a.transpose();     // M^-1 J P J^T M^-1
    AlignmentTerm t;
    t.loss = proj.trace() - (jac.transpose() * ap).trace();
    t.d_jac = -2.0 * (ap - b * jac);
    t.damping_used = lambda;
    return t;
  }
  throw TrainingError("ecomann", "alignment: J J^T + damping I stays singular after damping escalation");
}

double loss_alignment(const MlpModel& model, const Eigen::VectorXd& q, const Eigen::MatrixXd& normal_basis,
                      double damping) {
  return alignment_term(model.jacobian(q), normal_basis, damping).loss;
}

}  // namespace ecomann
