#include "ecomann/kinematics.hpp"

#include <Eigen/Geometry>

namespace ecomann {

KinematicChain KinematicChain::plane_arm_3r() {
  const Eigen::Vector3d link(0.5, 0.0, 0.0);
  return {{Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitY()}, {link, link, link}};
}

KinematicChain KinematicChain::orient_arm_6r() {
  const Eigen::Vector3d link(0.3, 0.0, 0.0);
  return {{Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ(),
           Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitX()},
          std::vector<Eigen::Vector3d>(6, link)};
}

namespace {

void check_dims(const KinematicChain& chain, Eigen::Index n) {
  if (chain.joint_axes.size() != chain.link_offsets.size()) {
    throw ParameterError("dataset", "kinematic chain has mismatched axes/offsets");
  }
  if (n != chain.dof()) {
    throw ParameterError("dataset", "fk: configuration has " + std::to_string(n) + " entries, chain has " +
                                        std::to_string(chain.dof()) + " joints");
  }
}

}  // namespace

Pose fk(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q) {
  check_dims(chain, q.size());
  Pose pose{Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()};
  for (int i = 0; i < chain.dof(); ++i) {
    pose.rotation = pose.rotation * Eigen::AngleAxisd(q(i), chain.joint_axes[static_cast<std::size_t>(i)]).toRotationMatrix();
    pose.position += pose.rotation * chain.link_offsets[static_cast<std::size_t>(i)];
  }
  return pose;
}

FkDerivatives fk_derivatives(const KinematicChain& chain, const Eigen::Ref<const Eigen::VectorXd>& q) {
  check_dims(chain, q.size());
  const int n = chain.dof();
  std::vector<Eigen::Vector3d> world_axes(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector3d> joint_origins(static_cast<std::size_t>(n));

  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto& axis = chain.joint_axes[static_cast<std::size_t>(i)];
    world_axes[static_cast<std::size_t>(i)] = rot * axis;
    joint_origins[static_cast<std::size_t>(i)] = pos;
    rot = rot * Eigen::AngleAxisd(q(i), axis).toRotationMatrix();
    pos += rot * chain.link_offsets[static_cast<std::size_t>(i)];
  }

  FkDerivatives out{{pos, rot}, Eigen::Matrix3Xd(3, n), Eigen::Matrix3Xd(3, n)};
  const Eigen::Vector3d z_axis = rot.col(2);
  for (int i = 0; i < n; ++i) {
    const auto& w = world_axes[static_cast<std::size_t>(i)];
    out.position_jacobian.col(i) = w.cross(pos - joint_origins[static_cast<std::size_t>(i)]);
    out.z_axis_jacobian.col(i) = w.cross(z_axis);
  }
  return out;
}

}  // namespace ecomann
