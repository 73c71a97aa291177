#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

/// d x l matrix with orthonormal columns.
inline Eigen::MatrixXd random_orthonormal(Eigen::Index d, Eigen::Index l, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(d, l, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, l);
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

}  // namespace testutil
