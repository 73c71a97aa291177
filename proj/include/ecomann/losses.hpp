#pragma once

#include "ecomann/common.hpp"
#include "ecomann/mlp.hpp"

namespace ecomann {

/// Fraction pairs with an output norm at or below this are skipped.
inline constexpr double kFractionMinNorm = 1e-8;

/// (||h|| - label)^2
double loss_norm(const Eigen::VectorXd& h, double norm_label);
Eigen::VectorXd grad_loss_norm(const Eigen::VectorXd& h, double norm_label);

/// ||h(q + i eps u) + h(q - i eps u)||^2
double loss_reflection(const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus);

bool fraction_pair_valid(const Eigen::VectorXd& h_far, const Eigen::VectorXd& h_near);
/// ||h_far / ||h_far|| - h_near / ||h_near||||^2; throws for outputs below kFractionMinNorm.
double loss_fraction(const Eigen::VectorXd& h_far, const Eigen::VectorXd& h_near);
/// Gradients with respect to (h_far, h_near).
std::pair<Eigen::VectorXd, Eigen::VectorXd> grad_loss_fraction(const Eigen::VectorXd& h_far,
                                                               const Eigen::VectorXd& h_near);

/// ||h_a - h_c||^2
double loss_similar(const Eigen::VectorXd& h_a, const Eigen::VectorXd& h_c);

/// tr(V_N V_N^T (I - J^T (J J^T + damping I)^-1 J)): the part of the local
/// normal space lying in the (damped) null space of J, and its gradient in J.
struct AlignmentTerm {
  double loss = 0.0;
  Eigen::MatrixXd d_jac;
  double damping_used = 0.0;
};

/// Escalates the damping tenfold (up to three times) if J J^T + damping I is
/// numerically singular, then gives up with a TrainingError.
AlignmentTerm alignment_term(const Eigen::MatrixXd& jac, const Eigen::MatrixXd& normal_basis, double damping);

double loss_alignment(const MlpModel& model, const Eigen::VectorXd& q, const Eigen::MatrixXd& normal_basis,
                      double damping);

}  // namespace ecomann
