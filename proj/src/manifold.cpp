#include "ecomann/manifold.hpp"

namespace ecomann {

namespace {

void check_dim(const ImplicitManifold& m, Eigen::Index n) {
  if (n != m.ambient_dim()) {
    throw ParameterError("planner", m.name() + ": expected a " + std::to_string(m.ambient_dim()) +
                                        "-dimensional configuration, got " + std::to_string(n));
  }
}

}  // namespace

Eigen::VectorXd SphereManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  Eigen::VectorXd h(1);
  h(0) = (q - center_).squaredNorm() - radius_ * radius_;
  return h;
}

Eigen::MatrixXd SphereManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  return 2.0 * (q - center_).transpose();
}

Eigen::VectorXd Circle3DManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  return Eigen::Vector2d(q(0) * q(0) + q(1) * q(1) - 1.0, q(2));
}

Eigen::MatrixXd Circle3DManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  Eigen::MatrixXd j(2, 3);
  j << 2.0 * q(0), 2.0 * q(1), 0.0, 0.0, 0.0, 1.0;
  return j;
}

PlaneManifold::PlaneManifold(Eigen::VectorXd normal, double offset) : normal_(std::move(normal)), offset_(offset) {
  const double n = normal_.norm();
  if (!(n > 0.0)) throw ParameterError("planner", "plane normal must be nonzero");
  normal_ /= n;
}

Eigen::VectorXd PlaneManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  Eigen::VectorXd h(1);
  h(0) = normal_.dot(q) - offset_;
  return h;
}

Eigen::MatrixXd PlaneManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  return normal_.transpose();
}

Eigen::VectorXd ParaboloidManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  Eigen::VectorXd h(1);
  h(0) = q(2) - sign_ * (q(0) * q(0) + q(1) * q(1) + apex_offset_);
  return h;
}

Eigen::MatrixXd ParaboloidManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  Eigen::MatrixXd j(1, 3);
  j << -2.0 * sign_ * q(0), -2.0 * sign_ * q(1), 1.0;
  return j;
}

Eigen::VectorXd PointManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  return q - target_;
}

Eigen::MatrixXd PointManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  check_dim(*this, q.size());
  return Eigen::MatrixXd::Identity(q.size(), q.size());
}

Eigen::VectorXd EndEffectorPlaneManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  Eigen::VectorXd h(1);
  h(0) = fk(chain_, q).position.z();
  return h;
}

Eigen::MatrixXd EndEffectorPlaneManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  return fk_derivatives(chain_, q).position_jacobian.row(2);
}

Eigen::VectorXd EndEffectorUprightManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  const Eigen::Matrix3d r = fk(chain_, q).rotation;
  return Eigen::Vector2d(r(0, 2), r(1, 2));
}

Eigen::MatrixXd EndEffectorUprightManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  return fk_derivatives(chain_, q).z_axis_jacobian.topRows(2);
}

StackedManifold::StackedManifold(std::vector<ManifoldPtr> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw ParameterError("planner", "stacked manifold needs at least one part");
  for (const auto& p : parts_) {
    if (p->ambient_dim() != parts_.front()->ambient_dim()) {
      throw ParameterError("planner", "stacked manifold parts disagree on ambient dimension");
    }
    codim_ += p->codim();
  }
}

Eigen::VectorXd StackedManifold::evaluate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  Eigen::VectorXd h(codim_);
  Eigen::Index row = 0;
  for (const auto& p : parts_) {
    h.segment(row, p->codim()) = p->evaluate(q);
    row += p->codim();
  }
  return h;
}

Eigen::MatrixXd StackedManifold::jacobian(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  Eigen::MatrixXd j(codim_, ambient_dim());
  Eigen::Index row = 0;
  for (const auto& p : parts_) {
    j.middleRows(row, p->codim()) = p->jacobian(q);
    row += p->codim();
  }
  return j;
}

std::string StackedManifold::name() const {
  std::string out;
  for (const auto& p : parts_) out += (out.empty() ? "" : "+") + p->name();
  return out;
}

Eigen::MatrixXd finite_difference_jacobian(const ImplicitManifold& m, const Eigen::Ref<const Eigen::VectorXd>& q,
                                           double step) {
  Eigen::MatrixXd j(m.codim(), q.size());
  Eigen::VectorXd x = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    x(i) = q(i) + step;
    const Eigen::VectorXd hp = m.evaluate(x);
    x(i) = q(i) - step;
    const Eigen::VectorXd hm = m.evaluate(x);
    x(i) = q(i);
    j.col(i) = (hp - hm) / (2.0 * step);
  }
  return j;
}

}  // namespace ecomann
