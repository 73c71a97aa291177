#pragma once

#include "ecomann/common.hpp"
#include "ecomann/kinematics.hpp"

#include <memory>
#include <string>

namespace ecomann {

/// An equality-constraint manifold {q : h(q) = 0}, h: R^d -> R^l.
/// Implementations are immutable and safe to share across threads.
class ImplicitManifold {
 public:
  virtual ~ImplicitManifold() = default;

  virtual Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const = 0;
  virtual Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const = 0;
  virtual int ambient_dim() const = 0;
  virtual int codim() const = 0;
  virtual std::string name() const = 0;
  virtual bool is_learned() const { return false; }
};

using ManifoldPtr = std::shared_ptr<const ImplicitManifold>;

// ---- analytic constraints -------------------------------------------------

/// ||q - center||^2 - radius^2 in R^3.
class SphereManifold final : public ImplicitManifold {
 public:
  explicit SphereManifold(Eigen::Vector3d center = Eigen::Vector3d::Zero(), double radius = 1.0)
      : center_(std::move(center)), radius_(radius) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return 3; }
  int codim() const override { return 1; }
  std::string name() const override { return "sphere"; }

 private:
  Eigen::Vector3d center_;
  double radius_;
};

/// (x^2 + y^2 - 1, z): unit circle in the z = 0 plane.
class Circle3DManifold final : public ImplicitManifold {
 public:
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return 3; }
  int codim() const override { return 2; }
  std::string name() const override { return "circle3d"; }
};

/// n^T q - offset, for a unit normal n.
class PlaneManifold final : public ImplicitManifold {
 public:
  PlaneManifold(Eigen::VectorXd normal, double offset);

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return static_cast<int>(normal_.size()); }
  int codim() const override { return 1; }
  std::string name() const override { return "plane"; }

 private:
  Eigen::VectorXd normal_;
  double offset_;
};

/// z - sign * (x^2 + y^2 + apex_offset): an upward (sign = +1) or downward
/// (sign = -1) paraboloid with apex at z = sign * apex_offset.
class ParaboloidManifold final : public ImplicitManifold {
 public:
  ParaboloidManifold(double sign, double apex_offset) : sign_(sign), apex_offset_(apex_offset) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return 3; }
  int codim() const override { return 1; }
  std::string name() const override { return sign_ > 0 ? "paraboloid_up" : "paraboloid_down"; }

 private:
  double sign_;
  double apex_offset_;
};

/// q - target: the single-point manifold used as a goal stage.
class PointManifold final : public ImplicitManifold {
 public:
  explicit PointManifold(Eigen::VectorXd target) : target_(std::move(target)) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return static_cast<int>(target_.size()); }
  int codim() const override { return static_cast<int>(target_.size()); }
  std::string name() const override { return "point"; }

 private:
  Eigen::VectorXd target_;
};

/// End-effector height p_z(fk(q)) of a serial chain.
class EndEffectorPlaneManifold final : public ImplicitManifold {
 public:
  explicit EndEffectorPlaneManifold(KinematicChain chain) : chain_(std::move(chain)) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return chain_.dof(); }
  int codim() const override { return 1; }
  std::string name() const override { return "plane_arm"; }

 private:
  KinematicChain chain_;
};

/// x and y components of the end-effector z-axis; zero iff the tool is upright.
class EndEffectorUprightManifold final : public ImplicitManifold {
 public:
  explicit EndEffectorUprightManifold(KinematicChain chain) : chain_(std::move(chain)) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return chain_.dof(); }
  int codim() const override { return 2; }
  std::string name() const override { return "orient_arm"; }

 private:
  KinematicChain chain_;
};

/// Intersection of several manifolds: the stacked constraint (h_1; h_2; ...).
class StackedManifold final : public ImplicitManifold {
 public:
  explicit StackedManifold(std::vector<ManifoldPtr> parts);

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const override;
  int ambient_dim() const override { return parts_.front()->ambient_dim(); }
  int codim() const override { return codim_; }
  std::string name() const override;

 private:
  std::vector<ManifoldPtr> parts_;
  int codim_ = 0;
};

/// Central finite-difference Jacobian, used to audit analytic Jacobians.
Eigen::MatrixXd finite_difference_jacobian(const ImplicitManifold& m, const Eigen::Ref<const Eigen::VectorXd>& q,
                                           double step = 1e-6);

}  // namespace ecomann
