#include "doctest.h"
#include "test_util.hpp"

#include "ecomann/dataset.hpp"
#include "ecomann/kinematics.hpp"
#include "ecomann/manifold.hpp"
#include "ecomann/projection.hpp"

#include <numbers>

using namespace ecomann;

TEST_CASE("forward kinematics of the plane arm") {
  const auto arm = KinematicChain::plane_arm_3r();
  CHECK((fk(arm, Eigen::Vector3d::Zero()).position - Eigen::Vector3d(1.5, 0, 0)).norm() <= 1e-12);
  CHECK((fk(arm, Eigen::Vector3d(std::numbers::pi, 0, 0)).position - Eigen::Vector3d(-1.5, 0, 0)).norm() <= 1e-12);
  CHECK_THROWS_AS(fk(arm, Eigen::Vector2d::Zero()), ParameterError);
}

TEST_CASE("forward kinematics derivatives match finite differences") {
  std::mt19937_64 rng(2);
  for (const auto& chain : {KinematicChain::plane_arm_3r(), KinematicChain::orient_arm_6r()}) {
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd q = testutil::random_matrix(chain.dof(), 1, rng);
      const FkDerivatives der = fk_derivatives(chain, q);
      Eigen::Matrix3Xd pj(3, chain.dof()), zj(3, chain.dof());
      for (int i = 0; i < chain.dof(); ++i) {
        Eigen::VectorXd qp = q, qm = q;
        qp(i) += 1e-6;
        qm(i) -= 1e-6;
        const Pose a = fk(chain, qp), b = fk(chain, qm);
        pj.col(i) = (a.position - b.position) / 2e-6;
        zj.col(i) = (a.rotation.col(2) - b.rotation.col(2)) / 2e-6;
      }
      CHECK(testutil::rel_err(der.position_jacobian, pj) <= 1e-6);
      CHECK(testutil::rel_err(der.z_axis_jacobian, zj) <= 1e-6);
      CHECK((der.pose.rotation.transpose() * der.pose.rotation - Eigen::Matrix3d::Identity()).norm() <= 1e-12);
    }
  }
}

TEST_CASE("analytic manifolds: Jacobians agree with finite differences") {
  std::mt19937_64 rng(4);
  std::vector<ManifoldPtr> ms{std::make_shared<SphereManifold>(),
                              std::make_shared<Circle3DManifold>(),
                              std::make_shared<PlaneManifold>(Eigen::Vector3d(0, 0, 1), 0.2),
                              std::make_shared<ParaboloidManifold>(1.0, 0.5),
                              std::make_shared<ParaboloidManifold>(-1.0, 0.5),
                              std::make_shared<PointManifold>(Eigen::Vector3d(1, 2, 3)),
                              std::make_shared<EndEffectorPlaneManifold>(KinematicChain::plane_arm_3r()),
                              std::make_shared<EndEffectorUprightManifold>(KinematicChain::orient_arm_6r())};
  ms.push_back(std::make_shared<StackedManifold>(std::vector<ManifoldPtr>{ms[0], ms[3]}));
  for (const auto& m : ms) {
    CAPTURE(m->name());
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd q = testutil::random_matrix(m->ambient_dim(), 1, rng);
      const Eigen::MatrixXd j = m->jacobian(q);
      CHECK(j.rows() == m->codim());
      CHECK(j.cols() == m->ambient_dim());
      CHECK(testutil::rel_err(j, finite_difference_jacobian(*m, q, 1e-5)) <= 1e-4);
    }
  }
}

TEST_CASE("projection onto analytic manifolds") {
  const SphereManifold sphere;
  SUBCASE("sphere from (2,0,0)") {
    ProjectionOptions o;
    o.tol = 1e-6;
    const auto r = project(sphere, Eigen::Vector3d(2, 0, 0), o);
    CHECK(r.converged);
    CHECK((r.q - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-6);
    CHECK(r.iters <= 50);
  }
  SUBCASE("already on the manifold") {
    const auto r = project(sphere, Eigen::Vector3d(0, 1, 0));
    CHECK(r.converged);
    CHECK(r.iters == 0);
  }
  SUBCASE("circle from its symmetry axis") {
    const Circle3DManifold circle;
    ProjectionOptions o;
    o.tol = 1e-6;
    const auto r = project(circle, Eigen::Vector3d(0, 0, 1), o);
    CHECK(r.converged);
    CHECK(circle.evaluate(r.q).norm() <= 1e-6);
  }
  SUBCASE("residual never increases between accepted iterates") {
    std::mt19937_64 rng(8);
    const ParaboloidManifold para(1.0, 0.5);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd q = 2.0 * testutil::random_matrix(3, 1, rng);
      double prev = para.evaluate(q).norm();
      for (int it = 0; it < 30; ++it) {
        ProjectionOptions one;
        one.max_iters = 1;
        one.tol = 1e-12;
        const auto r = project(para, q, one);
        const double now = para.evaluate(r.q).norm();
        CHECK(now <= prev);
        prev = now;
        q = r.q;
      }
    }
  }
  SUBCASE("bad input") {
    ProjectionOptions o;
    o.tol = 0.0;
    CHECK_THROWS_AS(project(sphere, Eigen::Vector3d(2, 0, 0), o), ParameterError);
    CHECK_THROWS_AS(project(sphere, Eigen::Vector3d(NAN, 0, 0)), ProjectionError);
  }
}

TEST_CASE("dataset generators lie on their ground truth") {
  for (const std::string kind : {"sphere", "circle3d", "plane", "orient"}) {
    CAPTURE(kind);
    const auto ds = generate_dataset(kind, 200, 3);
    CHECK(ds.size() == 200);
    const auto gt = ground_truth_manifold(ds.ground_truth);
    CHECK(gt->ambient_dim() == ds.dim());
    CHECK(gt->codim() == ds.true_codim);
    for (Eigen::Index i = 0; i < ds.size(); ++i) CHECK(gt->evaluate(ds.points.row(i).transpose()).norm() <= 1e-6);
    if (kind == "plane" || kind == "orient") {
      CHECK(ds.points.cwiseAbs().maxCoeff() <= std::numbers::pi + 1e-12);
    }
  }
  CHECK_THROWS_AS(generate_dataset("torus", 10, 0), ParameterError);
  CHECK_THROWS_AS(gen_sphere(0, 0), ParameterError);
}

TEST_CASE("plane arm: base yaw configurations are kept by projection") {
  const EndEffectorPlaneManifold plane(KinematicChain::plane_arm_3r());
  const auto r = project(plane, Eigen::Vector3d(0.7, 0, 0));
  CHECK(r.iters == 0);
  CHECK((r.q - Eigen::Vector3d(0.7, 0, 0)).norm() == 0.0);
}

TEST_CASE("generators are deterministic and noise keeps the ground truth") {
  const auto a = gen_sphere(50, 9), b = gen_sphere(50, 9);
  CHECK(a.points == b.points);
  const auto n = add_noise(a, 0.01, 1);
  CHECK(n.ground_truth == a.ground_truth);
  CHECK((n.points - a.points).norm() > 0.0);
  CHECK(add_noise(a, 0.0, 1).points == a.points);
  CHECK_THROWS_AS(add_noise(a, -1.0, 1), ParameterError);
}

TEST_CASE("dataset file round trip") {
  const auto ds = gen_circle3d(25, 2);
  const auto back = parse_dataset(format_dataset(ds));
  CHECK(back.points == ds.points);
  CHECK(back.true_codim == 2);
  CHECK(back.ground_truth == GroundTruth::Circle3D);
  CHECK(back.name == ds.name);

  std::vector<int> levels(25);
  for (int i = 0; i < 25; ++i) levels[i] = i % 4;
  std::vector<int> read;
  const auto with_levels = parse_dataset(format_dataset(ds, &levels), &read);
  CHECK(read == levels);
  CHECK(with_levels.points == ds.points);
}

TEST_CASE("dataset parse errors carry the line number") {
  const std::string header = "# name=x d=2 N=2 l=1 gt=None\n";
  CHECK_THROWS_AS(parse_dataset(header + "1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset(header + "1,2\n3\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset(header + "1,2\n3,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset("1,2\n"), ParseError);
  try {
    parse_dataset(header + "1,2\n3,abc\n");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const auto ok = parse_dataset(header + "1,2\n3,4\n");
  CHECK(ok.points(1, 1) == 4.0);
}

TEST_CASE("dataset statistical oracles") {
  CHECK((fk(KinematicChain::orient_arm_6r(), Eigen::VectorXd::Zero(6)).rotation - Eigen::Matrix3d::Identity()).norm() <= 1e-12);
  const EndEffectorUprightManifold upright(KinematicChain::orient_arm_6r());
  CHECK(upright.evaluate(Eigen::VectorXd::Zero(6)).norm() == 0.0);

  const auto sphere = gen_sphere(5000, 12);
  CHECK(sphere.points.colwise().mean().cwiseAbs().maxCoeff() <= 0.05);

  const auto circle = gen_circle3d(1000, 12);
  CHECK(circle.size() == 1000);
  std::vector<int> bins(8, 0);
  for (Eigen::Index i = 0; i < circle.size(); ++i) {
    CHECK(circle.points(i, 2) == 0.0);
    const double th = std::atan2(circle.points(i, 1), circle.points(i, 0)) + std::numbers::pi;
    ++bins[std::min(7, static_cast<int>(th / (2 * std::numbers::pi) * 8))];
  }
  // multinomial: mean 125, sd sqrt(1000 * 1/8 * 7/8) ~ 10.5
  for (int b : bins) CHECK(std::abs(b - 125) <= 3 * 10.46);

  const auto noisy = add_noise(gen_sphere(2000, 3), 0.01, 4);
  double mean_dev = 0.0;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) mean_dev += std::abs(noisy.points.row(i).norm() - 1.0);
  mean_dev /= static_cast<double>(noisy.size());
  CHECK(mean_dev < 0.03);
  CHECK(mean_dev > 0.004);  // E|N(0, 0.01)| ~ 0.008
}
