#include "ecomann/lin_geom.hpp"

#include <map>
#include <queue>

namespace ecomann {

KdTree::KdTree(PointMatrix points, int leaf_size) : points_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
  index_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(index_.begin(), index_.end(), Eigen::Index{0});
  if (points_.rows() > 0) build(0, points_.rows());
}

int KdTree::build(Eigen::Index begin, Eigen::Index end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Eigen::RowVectorXd lo = points_.row(index_[static_cast<std::size_t>(begin)]);
  Eigen::RowVectorXd hi = lo;
  for (Eigen::Index i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.row(index_[static_cast<std::size_t>(i)]));
    hi = hi.cwiseMax(points_.row(index_[static_cast<std::size_t>(i)]));
  }
  Eigen::Index dim = 0;
  const double spread = (hi - lo).maxCoeff(&dim);
  if (spread <= 0.0) return id;  // all coincident: keep as a leaf

  const Eigen::Index mid = begin + (end - begin) / 2;
  auto first = index_.begin() + begin;
  std::nth_element(first, index_.begin() + mid, index_.begin() + end, [&](Eigen::Index a, Eigen::Index b) {
    const double va = points_(a, dim), vb = points_(b, dim);
    return va < vb || (va == vb && a < b);
  });
  nodes_[static_cast<std::size_t>(id)].split_dim = static_cast<int>(dim);
  nodes_[static_cast<std::size_t>(id)].split_value = points_(index_[static_cast<std::size_t>(mid)], dim);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

IndexList KdTree::knn(const Eigen::Ref<const Eigen::VectorXd>& q, Eigen::Index k, Eigen::Index exclude) const {
  const Eigen::Index available = points_.rows() - ((exclude >= 0 && exclude < points_.rows()) ? 1 : 0);
  if (k < 1 || k > available) throw ParameterError("lin_geom", "KdTree::knn: K out of range");
  if (q.size() != points_.cols()) throw ParameterError("lin_geom", "KdTree::knn: dimension mismatch");

  using Entry = std::pair<double, Eigen::Index>;
  std::priority_queue<Entry> best;  // max-heap on (distance, index)

  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.split_dim < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index idx = index_[static_cast<std::size_t>(i)];
        if (idx == exclude) continue;
        const Entry e{(points_.row(idx).transpose() - q).squaredNorm(), idx};
        if (static_cast<Eigen::Index>(best.size()) < k) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      return;
    }
    const double diff = q(node.split_dim) - node.split_value;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    self(self, near);
    // <= keeps equal-distance candidates reachable for the index tie-break.
    if (static_cast<Eigen::Index>(best.size()) < k || diff * diff <= best.top().first) self(self, far);
  };
  visit(visit, 0);

  IndexList out(best.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = best.top().second;
    best.pop();
  }
  return out;
}

Eigen::Index KdTree::nearest(const Eigen::Ref<const Eigen::VectorXd>& q) const { return knn(q, 1).front(); }

std::vector<LocalFrame> local_frames(const PointMatrix& points, int k, std::optional<int> l_override) {
  if (k < points.cols()) throw ParameterError("lin_geom", "local_frames requires K >= d");
  if (k >= points.rows()) throw ParameterError("lin_geom", "local_frames requires K < N");
  const KdTree tree(points);
  std::vector<LocalFrame> frames;
  frames.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const IndexList nb = tree.knn(points.row(i).transpose(), k, i);
    frames.push_back(local_pca_from_neighbors(points, i, nb, l_override));
  }
  return frames;
}

int consensus_codim(const std::vector<LocalFrame>& frames) {
  if (frames.empty()) throw ParameterError("lin_geom", "consensus_codim: no frames");
  std::map<int, std::size_t> votes;
  for (const auto& f : frames) ++votes[f.codim];
  int best = votes.begin()->first;
  std::size_t count = 0;
  for (const auto& [l, c] : votes) {
    if (c > count) {
      best = l;
      count = c;
    }
  }
  return best;
}

int estimate_global_codim(const PointMatrix& points, int k) {
  const int kk = std::min<int>(k, static_cast<int>(points.rows()) - 1);
  return consensus_codim(local_frames(points, kk));
}

}  // namespace ecomann
