#pragma once

// Dense linear-algebra and local-geometry primitives: symmetric
// eigendecomposition, nearest-neighbour search, local PCA, codimension
// estimation and the exponential map so(l) -> SO(l).

#include "ecomann/common.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>

namespace ecomann {

/// Default neighbourhood size for local PCA in ambient dimension d.
inline int default_k(int d) { return std::max(d + 1, 2 * d); }

template <typename Scalar>
struct SymmetricEigen {
  VectorX<Scalar> eigvals;  // non-increasing
  MatrixX<Scalar> eigvecs;  // column j pairs with eigvals(j)
};

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvalues are
/// returned in non-increasing order with matching eigenvector columns.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eigen(const Eigen::MatrixBase<Derived>& input) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = input.rows();
  if (input.cols() != n) {
    throw ParameterError("lin_geom", "symmetric_eigen requires a square matrix");
  }
  MatrixX<Scalar> a = input;
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

  const Scalar scale = std::max(a.norm(), Scalar(1e-300));
  for (int sweep = 0; sweep < 100; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (sqrt(off) <= std::numeric_limits<Scalar>::epsilon() * scale * Scalar(1e-2)) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (abs(theta) + sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        // A <- G^T A G with the Givens rotation acting on (p, q).
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen<Scalar> out;
  out.eigvals.resize(n);
  out.eigvecs.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigvals(j) = a(order[j], order[j]);
    out.eigvecs.col(j) = v.col(order[j]);
  }
  return out;
}

/// Indices of the K points nearest (Euclidean) to points.row(query_index),
/// excluding the query itself. Ties are broken by the smaller index.
template <typename Derived>
IndexList knn_search(const Eigen::MatrixBase<Derived>& points, Eigen::Index query_index, Eigen::Index k) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (query_index < 0 || query_index >= n) {
    throw ParameterError("lin_geom", "knn_search: query index out of range");
  }
  if (k < 1 || k >= n) {
    throw ParameterError("lin_geom", "knn_search: K=" + std::to_string(k) + " must satisfy 1 <= K < N=" +
                                         std::to_string(n));
  }
  std::vector<std::pair<Scalar, Eigen::Index>> cand;
  cand.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == query_index) continue;
    cand.emplace_back((points.row(i) - points.row(query_index)).squaredNorm(), i);
  }
  std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
  IndexList out(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = cand[static_cast<std::size_t>(i)].second;
  return out;
}

/// Exact k-d tree over the rows of a point matrix. Results match brute-force
/// search including the smaller-index tie-break.
class KdTree {
 public:
  explicit KdTree(PointMatrix points, int leaf_size = 8);

  Eigen::Index size() const { return points_.rows(); }
  const PointMatrix& points() const { return points_; }

  /// K nearest rows to q, skipping row `exclude` (pass -1 to keep all).
  IndexList knn(const Eigen::Ref<const Eigen::VectorXd>& q, Eigen::Index k, Eigen::Index exclude = -1) const;

  /// Index of the nearest row to q.
  Eigen::Index nearest(const Eigen::Ref<const Eigen::VectorXd>& q) const;

 private:
  struct Node {
    Eigen::Index begin = 0, end = 0;  // range into index_
    int split_dim = -1;
    double split_value = 0.0;
    int left = -1, right = -1;
  };

  int build(Eigen::Index begin, Eigen::Index end);

  PointMatrix points_;
  std::vector<Eigen::Index> index_;
  std::vector<Node> nodes_;
  int leaf_size_;
};

/// Local PCA at one point: eigenstructure of the neighbour covariance split
/// into tangent (leading d-l columns) and normal (trailing l columns) bases.
template <typename Scalar>
struct BasicLocalFrame {
  VectorX<Scalar> center;
  MatrixX<Scalar> eigvecs;
  VectorX<Scalar> eigvals;
  int codim = 1;

  Eigen::Index dim() const { return eigvecs.rows(); }
  auto tangent_basis() const { return eigvecs.leftCols(dim() - codim); }
  auto normal_basis() const { return eigvecs.rightCols(codim); }
  auto tangent_eigvals() const { return eigvals.head(dim() - codim); }
};

using LocalFrame = BasicLocalFrame<double>;

/// Number of constraints from the largest consecutive eigenvalue gap:
/// l = d - j*, with j* the (1-based, first on ties) position of the gap.
template <typename Derived>
int estimate_codim(const Eigen::MatrixBase<Derived>& eigvals) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = eigvals.size();
  if (d < 2) throw ParameterError("lin_geom", "estimate_codim requires d >= 2");
  Eigen::Index best = 0;
  Scalar best_gap = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    const Scalar gap = std::max(eigvals(j), Scalar(0)) - std::max(eigvals(j + 1), Scalar(0));
    if (gap > best_gap) {
      best_gap = gap;
      best = j;
    }
  }
  return static_cast<int>(d - (best + 1));
}

/// Local PCA from an explicit neighbour set.
template <typename Derived>
BasicLocalFrame<typename Derived::Scalar> local_pca_from_neighbors(const Eigen::MatrixBase<Derived>& points,
                                                                   Eigen::Index center_index,
                                                                   const IndexList& neighbors,
                                                                   std::optional<int> l_override = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = points.cols();
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  if (d < 2) throw ParameterError("lin_geom", "local_pca requires d >= 2");
  if (k < d) {
    throw ParameterError("lin_geom", "local_pca requires K >= d (K=" + std::to_string(k) +
                                         ", d=" + std::to_string(d) + ")");
  }
  const VectorX<Scalar> q = points.row(center_index).transpose();
  MatrixX<Scalar> x(k, d);
  for (Eigen::Index i = 0; i < k; ++i) x.row(i) = points.row(neighbors[static_cast<std::size_t>(i)]) - q.transpose();

  Scalar spread = 0;
  for (Eigen::Index i = 1; i < k; ++i) spread = std::max(spread, (x.row(i) - x.row(0)).squaredNorm());
  if (spread == Scalar(0)) {
    throw RankDeficiencyError("lin_geom", "local_pca: degenerate neighbourhood at index " +
                                              std::to_string(center_index) + " (all neighbours identical)");
  }

  const MatrixX<Scalar> s = (x.transpose() * x) / Scalar(k - 1);
  auto eig = symmetric_eigen(s);
  eig.eigvals = eig.eigvals.cwiseMax(Scalar(0));

  BasicLocalFrame<Scalar> frame;
  frame.center = q;
  frame.eigvecs = std::move(eig.eigvecs);
  frame.eigvals = std::move(eig.eigvals);
  if (l_override) {
    if (*l_override < 1 || *l_override >= d) {
      throw ParameterError("lin_geom", "local_pca: codimension override must be in [1, d-1]");
    }
    frame.codim = *l_override;
  } else {
    frame.codim = estimate_codim(frame.eigvals);
  }
  return frame;
}

/// Local PCA at points.row(center_index) over its K nearest neighbours.
template <typename Derived>
BasicLocalFrame<typename Derived::Scalar> local_pca(const Eigen::MatrixBase<Derived>& points,
                                                    Eigen::Index center_index, Eigen::Index k,
                                                    std::optional<int> l_override = std::nullopt) {
  if (k < points.cols()) throw ParameterError("lin_geom", "local_pca requires K >= d");
  return local_pca_from_neighbors(points, center_index, knn_search(points, center_index, k), l_override);
}

/// Local PCA at every row, neighbours found with a k-d tree.
std::vector<LocalFrame> local_frames(const PointMatrix& points, int k, std::optional<int> l_override = std::nullopt);

/// Most frequent per-point codimension; ties resolve to the smaller value.
int consensus_codim(const std::vector<LocalFrame>& frames);

/// Neighbourhood size for the codimension vote. The gap rule needs the
/// neighbours to spread over the whole tangent space; with only default_k
/// points the two largest eigenvalues are often far apart and the vote
/// overestimates l.
inline int default_codim_k(int d) { return std::max(default_k(d), 50); }

/// consensus_codim over frames built with k neighbours (capped at N-1).
int estimate_global_codim(const PointMatrix& points, int k);

/// exp(L) for a skew-symmetric L. Closed forms for l <= 3, scaling and
/// squaring otherwise.
template <typename Derived>
MatrixX<typename Derived::Scalar> expm_skew(const Eigen::MatrixBase<Derived>& skew) {
  using Scalar = typename Derived::Scalar;
  using std::cos;
  using std::sin;
  const Eigen::Index l = skew.rows();
  if (skew.cols() != l || l < 1) throw ParameterError("lin_geom", "expm_skew requires a square matrix");
  if ((skew + skew.transpose()).norm() > Scalar(1e-10)) {
    throw ParameterError("lin_geom", "expm_skew: input is not skew-symmetric");
  }
  if (l == 1) return MatrixX<Scalar>::Ones(1, 1);
  if (l == 2) {
    const Scalar t = skew(1, 0);
    MatrixX<Scalar> r(2, 2);
    r << cos(t), -sin(t), sin(t), cos(t);
    return r;
  }
  if (l == 3) {
    const Eigen::Matrix<Scalar, 3, 1> w(skew(2, 1), skew(0, 2), skew(1, 0));
    const Scalar theta = w.norm();
    const MatrixX<Scalar> k = skew;
    MatrixX<Scalar> r = MatrixX<Scalar>::Identity(3, 3);
    if (theta < Scalar(1e-8)) {
      // second-order Taylor; error O(theta^3) < 1e-24
      return r + k + Scalar(0.5) * k * k;
    }
    r += (sin(theta) / theta) * k + ((Scalar(1) - cos(theta)) / (theta * theta)) * (k * k);
    return r;
  }
  const Scalar norm1 = skew.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(norm1 / Scalar(0.5))));
  const MatrixX<Scalar> a = skew / std::pow(Scalar(2), squarings);
  MatrixX<Scalar> term = MatrixX<Scalar>::Identity(l, l);
  MatrixX<Scalar> sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * a / Scalar(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Skew-symmetric l x l matrix from its l(l-1)/2 upper-triangular parameters
/// (row-major order over i < j, entry (i, j) = -params, (j, i) = +params).
template <typename Derived>
MatrixX<typename Derived::Scalar> skew_from_params(const Eigen::MatrixBase<Derived>& params, Eigen::Index l) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> s = MatrixX<Scalar>::Zero(l, l);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) {
      s(j, i) = params(k);
      s(i, j) = -params(k);
      ++k;
    }
  }
  return s;
}

}  // namespace ecomann
