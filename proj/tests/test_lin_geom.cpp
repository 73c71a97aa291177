#include "doctest.h"
#include "test_util.hpp"

#include "ecomann/lin_geom.hpp"

#include <algorithm>
#include <numbers>

using namespace ecomann;

TEST_CASE("knn_search: nearest by distance, ties by index") {
  PointMatrix p(3, 2);
  p << 0, 0, 1, 0, 3, 0;
  CHECK(knn_search(p, 0, 1) == IndexList{1});
  p << 0, 0, 1, 0, 1, 0;
  CHECK(knn_search(p, 0, 1) == IndexList{1});
  CHECK_THROWS_AS(knn_search(p, 0, 3), ParameterError);
  CHECK_THROWS_AS(knn_search(p, 0, 0), ParameterError);
  CHECK_THROWS_AS(knn_search(p, 5, 1), ParameterError);
}

TEST_CASE("knn_search on a circle returns the angularly closest points") {
  const int n = 100;
  PointMatrix p(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * (i * 37 % n) / n;
    p.row(i) << std::cos(t), std::sin(t);
  }
  for (int q = 0; q < n; q += 7) {
    const IndexList nn = knn_search(p, q, 10);
    const double tq = std::atan2(p(q, 1), p(q, 0));
    std::vector<double> arcs;
    for (int i = 0; i < n; ++i) {
      if (i == q) continue;
      arcs.push_back(std::abs(std::remainder(std::atan2(p(i, 1), p(i, 0)) - tq, 2.0 * std::numbers::pi)));
    }
    std::sort(arcs.begin(), arcs.end());
    for (auto i : nn) {
      const double a = std::abs(std::remainder(std::atan2(p(i, 1), p(i, 0)) - tq, 2.0 * std::numbers::pi));
      CHECK(a <= arcs[9] + 1e-12);
    }
  }
}

TEST_CASE("KdTree agrees with brute force on 1000 random points") {
  std::mt19937_64 rng(3);
  PointMatrix p = testutil::random_matrix(1000, 3, rng);
  // duplicate a few rows to exercise the tie-break
  p.row(10) = p.row(20);
  p.row(30) = p.row(20);
  const KdTree tree(p);
  for (Eigen::Index q = 0; q < 1000; q += 13) {
    CHECK(tree.knn(p.row(q).transpose(), 12, q) == knn_search(p, q, 12));
  }
  CHECK(tree.knn(p.row(20).transpose(), 2, 20) == IndexList{10, 30});
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd q = testutil::random_matrix(3, 1, rng);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < p.rows(); ++i)
      if ((p.row(i).transpose() - q).squaredNorm() < (p.row(best).transpose() - q).squaredNorm()) best = i;
    CHECK(tree.nearest(q) == best);
  }
}

TEST_CASE("symmetric_eigen matches a reference solver") {
  std::mt19937_64 rng(7);
  for (int d : {2, 3, 5, 8}) {
    const Eigen::MatrixXd a = testutil::random_matrix(d, d, rng);
    const Eigen::MatrixXd s = a * a.transpose();
    const auto eig = symmetric_eigen(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(s);
    const Eigen::VectorXd ref_vals = ref.eigenvalues().reverse();
    CHECK((eig.eigvals - ref_vals).norm() <= 1e-10 * ref_vals.norm());
    CHECK((eig.eigvecs.transpose() * eig.eigvecs - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-10);
    CHECK((eig.eigvecs * eig.eigvals.asDiagonal() * eig.eigvecs.transpose() - s).norm() <= 1e-10 * s.norm());
    for (int i = 1; i < d; ++i) CHECK(eig.eigvals(i) <= eig.eigvals(i - 1));
  }
}

TEST_CASE("estimate_codim gap rule") {
  CHECK(estimate_codim(Eigen::Vector3d(2.0, 1.9, 0.01)) == 1);
  CHECK(estimate_codim(Eigen::Vector3d(2.0, 0.02, 0.01)) == 2);
  CHECK(estimate_codim(Eigen::Vector3d(1.0, 0.5, 0.0)) == 2);
  const Eigen::Vector4d v(3.0, 2.5, 0.4, 0.1);
  for (double c : {1e-6, 0.3, 7.0, 1e5}) CHECK(estimate_codim(Eigen::Vector4d(c * v)) == estimate_codim(v));
}

TEST_CASE("local_pca recovers analytic normals") {
  SUBCASE("unit circle in the plane") {
    PointMatrix p(50, 2);
    for (int i = 0; i < 50; ++i) {
      const double t = 2.0 * std::numbers::pi * i / 50;
      p.row(i) << std::cos(t), std::sin(t);
    }
    for (int c = 0; c < 50; c += 5) {
      const LocalFrame f = local_pca(p, c, 10);
      CHECK(f.codim == 1);
      const Eigen::Vector2d radial = p.row(c).transpose().normalized();
      CHECK(std::abs(f.normal_basis().col(0).dot(radial)) >= 0.99);
    }
  }
  SUBCASE("plane z = 0") {
    std::mt19937_64 rng(1);
    PointMatrix p = testutil::random_matrix(200, 3, rng);
    p.col(2).setZero();
    const LocalFrame f = local_pca(p, 0, 10);
    CHECK(f.codim == 1);
    CHECK(std::abs(std::abs(f.normal_basis()(2, 0)) - 1.0) <= 1e-10);
    CHECK(f.eigvals(2) <= 1e-12);
  }
  SUBCASE("identical neighbours are rank deficient") {
    PointMatrix p = PointMatrix::Zero(8, 3);
    p.row(0) << 1, 2, 3;
    CHECK_THROWS_AS(local_pca(p, 0, 4), RankDeficiencyError);
  }
  SUBCASE("K below d is rejected") {
    PointMatrix p = PointMatrix::Random(10, 3);
    CHECK_THROWS_AS(local_pca(p, 0, 2), ParameterError);
  }
}

TEST_CASE("local frame invariants") {
  std::mt19937_64 rng(11);
  PointMatrix p = testutil::random_matrix(300, 4, rng);
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i).normalize();
  const auto frames = local_frames(p, default_k(4));
  REQUIRE(frames.size() == 300);
  for (const auto& f : frames) {
    const Eigen::Index d = f.dim();
    CHECK((f.eigvecs.transpose() * f.eigvecs - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-10);
    CHECK((f.tangent_basis().transpose() * f.normal_basis()).norm() <= 1e-10);
    CHECK(f.tangent_basis().cols() + f.normal_basis().cols() == d);
    for (Eigen::Index j = 0; j < d; ++j) {
      CHECK(f.eigvals(j) >= 0.0);
      if (j > 0) CHECK(f.eigvals(j) <= f.eigvals(j - 1));
    }
  }
  const auto forced = local_frames(p, default_k(4), 2);
  for (const auto& f : forced) CHECK(f.codim == 2);
}

TEST_CASE("consensus and global codimension") {
  PointMatrix p(400, 3);
  std::mt19937_64 rng(5);
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) = testutil::random_matrix(1, 3, rng).normalized();
  CHECK(estimate_global_codim(p, default_codim_k(3)) == 1);
  std::vector<LocalFrame> frames(3);
  frames[0].codim = 2;
  frames[1].codim = 1;
  frames[2].codim = 2;
  CHECK(consensus_codim(frames) == 2);
  frames.pop_back();
  CHECK(consensus_codim(frames) == 1);
}

namespace {

Eigen::MatrixXd series_exp(const Eigen::MatrixXd& l, int terms = 30) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(l.rows(), l.cols());
  Eigen::MatrixXd term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * l / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("expm_skew") {
  Eigen::Matrix2d l;
  l << 0, -std::numbers::pi / 2, std::numbers::pi / 2, 0;
  Eigen::Matrix2d expected;
  expected << 0, -1, 1, 0;
  CHECK((expm_skew(l) - expected).norm() <= 1e-12);
  CHECK((expm_skew(Eigen::Matrix3d::Zero()) - Eigen::Matrix3d::Identity()).norm() == 0.0);
  CHECK(expm_skew(Eigen::Matrix<double, 1, 1>::Zero())(0, 0) == 1.0);

  std::mt19937_64 rng(9);
  for (int dim : {2, 3, 4, 6}) {
    for (int t = 0; t < 20; ++t) {
      const Eigen::Index np = dim * (dim - 1) / 2;
      const Eigen::VectorXd params = 0.3 * testutil::random_matrix(np, 1, rng);
      const Eigen::MatrixXd s = skew_from_params(params, dim);
      const Eigen::MatrixXd r = expm_skew(s);
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
      CHECK((r.transpose() * r - id).norm() <= 1e-9);
      CHECK(std::abs(r.determinant() - 1.0) <= 1e-9);
      CHECK((r - series_exp(s)).norm() <= 1e-9);
      CHECK((r * expm_skew(Eigen::MatrixXd(-s)) - id).norm() <= 1e-9);
    }
    // large angles exercise the scaling step
    const Eigen::MatrixXd big = skew_from_params(Eigen::VectorXd(4.0 * testutil::random_matrix(dim * (dim - 1) / 2, 1, rng)), dim);
    const Eigen::MatrixXd rb = expm_skew(big);
    CHECK((rb.transpose() * rb - Eigen::MatrixXd::Identity(dim, dim)).norm() <= 1e-9);
    CHECK(std::abs(rb.determinant() - 1.0) <= 1e-9);
  }
  Eigen::Matrix2d not_skew;
  not_skew << 0, 1, 1, 0;
  CHECK_THROWS_AS(expm_skew(not_skew), ParameterError);
}

TEST_CASE("lin_geom is scalar-generic") {
  Eigen::Matrix3f s;
  s << 4, 1, 0, 1, 3, 0, 0, 0, 1;
  const auto eig = symmetric_eigen(s);
  CHECK(eig.eigvals(0) >= eig.eigvals(1));
  CHECK(std::abs(eig.eigvals.sum() - 8.0f) <= 1e-5f);
  Eigen::Matrix<float, 3, 3> l = Eigen::Matrix3f::Zero();
  l(1, 0) = 0.5f;
  l(0, 1) = -0.5f;
  const auto r = expm_skew(l);
  CHECK((r.transpose() * r - Eigen::MatrixXf::Identity(3, 3)).norm() <= 1e-6f);
}
