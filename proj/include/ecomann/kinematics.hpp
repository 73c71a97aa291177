#pragma once

#include "ecomann/common.hpp"

namespace ecomann {

/// Serial chain of revolute joints. Joint i rotates about joint_axes[i]
/// (in its own frame), then the frame is translated by link_offsets[i].
struct KinematicChain {
  std::vector<Eigen::Vector3d> joint_axes;
  std::vector<Eigen::Vector3d> link_offsets;

  int dof() const { return static_cast<int>(joint_axes.size()); }

  /// 3R arm: axes (z, y, y), links of 0.5 along x.
  static KinematicChain plane_arm_3r();
  /// 6R arm: axes (z, y, y, z, y, x), links of 0.3 along x.
  static KinematicChain orient_arm_6r();
};

struct Pose {
  Eigen::Vector3d position;
  Eigen::Matrix3d rotation;
};

Pose fk(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q);

/// Derivatives of the end-effector position and of the end-effector z-axis
/// (third column of the rotation) with respect to each joint, both 3 x dof.
struct FkDerivatives {
  Pose pose;
  Eigen::Matrix3Xd position_jacobian;
  Eigen::Matrix3Xd z_axis_jacobian;
};

FkDerivatives fk_derivatives(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace ecomann
