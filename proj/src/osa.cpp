#include "ecomann/osa.hpp"

#include "ecomann/lin_geom.hpp"

#include <map>
#include <queue>
#include <random>

namespace ecomann {

namespace {

class UnionFind {
 public:
  explicit UnionFind(Eigen::Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Eigen::Index{0});
  }
  Eigen::Index find(Eigen::Index x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    return true;
  }

 private:
  std::vector<Eigen::Index> parent_;
};

}  // namespace

bool is_connected(Eigen::Index num_nodes, const std::vector<WeightedEdge>& edges) {
  if (num_nodes <= 1) return true;
  UnionFind uf(num_nodes);
  Eigen::Index components = num_nodes;
  for (const auto& e : edges)
    if (uf.unite(e.a, e.b)) --components;
  return components == 1;
}

NeighborGraph build_neighbor_graph(const PointMatrix& points, int h) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ParameterError("osa", "build_neighbor_graph requires at least 2 points");
  if (h < 1) throw ParameterError("osa", "build_neighbor_graph requires H >= 1");
  const KdTree tree(points);
  Eigen::Index hh = std::min<Eigen::Index>(h, n - 1);
  while (true) {
    std::map<std::pair<Eigen::Index, Eigen::Index>, double> unique;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j : tree.knn(points.row(i).transpose(), hh, i)) {
        const auto key = std::minmax(i, j);
        unique.emplace(key, (points.row(i) - points.row(j)).norm());
      }
    }
    NeighborGraph g{n, {}, static_cast<int>(hh)};
    g.edges.reserve(unique.size());
    for (const auto& [key, w] : unique) g.edges.push_back({key.first, key.second, w});
    if (is_connected(n, g.edges) || hh >= n - 1) return g;
    hh = std::min<Eigen::Index>(2 * hh, n - 1);
  }
}

std::vector<WeightedEdge> minimum_spanning_tree(const NeighborGraph& graph) {
  std::vector<WeightedEdge> edges = graph.edges;
  for (auto& e : edges)
    if (e.a > e.b) std::swap(e.a, e.b);
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  UnionFind uf(graph.num_nodes);
  std::vector<WeightedEdge> tree;
  tree.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(graph.num_nodes - 1, 0)));
  for (const auto& e : edges)
    if (uf.unite(e.a, e.b)) tree.push_back(e);
  if (static_cast<Eigen::Index>(tree.size()) + 1 != graph.num_nodes && graph.num_nodes > 0) {
    throw ParameterError("osa", "minimum_spanning_tree: graph is disconnected");
  }
  return tree;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> AlignmentGraph::edges() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  out.reserve(bfs_order.size());
  for (Eigen::Index v : bfs_order)
    if (parent[static_cast<std::size_t>(v)] >= 0) out.emplace_back(v, parent[static_cast<std::size_t>(v)]);
  return out;
}

AlignmentGraph bfs_tree(Eigen::Index num_nodes, const std::vector<WeightedEdge>& tree_edges, Eigen::Index root) {
  if (root < 0 || root >= num_nodes) throw ParameterError("osa", "bfs_tree: root out of range");
  std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(num_nodes));
  for (const auto& e : tree_edges) {
    adj[static_cast<std::size_t>(e.a)].push_back(e.b);
    adj[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  AlignmentGraph g;
  g.root = root;
  g.parent.assign(static_cast<std::size_t>(num_nodes), -1);
  g.children.assign(static_cast<std::size_t>(num_nodes), {});
  std::vector<bool> seen(static_cast<std::size_t>(num_nodes), false);
  std::queue<Eigen::Index> queue;
  queue.push(root);
  seen[static_cast<std::size_t>(root)] = true;
  while (!queue.empty()) {
    const Eigen::Index v = queue.front();
    queue.pop();
    g.bfs_order.push_back(v);
    for (Eigen::Index w : adj[static_cast<std::size_t>(v)]) {
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = true;
      g.parent[static_cast<std::size_t>(w)] = v;
      g.children[static_cast<std::size_t>(v)].push_back(w);
      queue.push(w);
    }
  }
  if (static_cast<Eigen::Index>(g.bfs_order.size()) != num_nodes) {
    throw ParameterError("osa", "bfs_tree: not every node is reachable from the root");
  }
  return g;
}

std::string to_string(PairOrientation o) {
  switch (o) {
    case PairOrientation::kAfwdCfwd: return "a+c+";
    case PairOrientation::kAfwdCflip: return "a+c-";
    case PairOrientation::kAflipCfwd: return "a-c+";
    case PairOrientation::kAflipCflip: return "a-c-";
  }
  return "?";
}

double osa_loss(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vc, const Eigen::MatrixXd& r) {
  const Eigen::Index l = va.cols();
  return (Eigen::MatrixXd::Identity(l, l) - (va * r).transpose() * vc).squaredNorm();
}

Eigen::MatrixXd flip_first_column(const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out = v;
  out.col(0) = -out.col(0);
  return out;
}

namespace {

void check_orthonormal(const Eigen::MatrixXd& v, const char* which) {
  const Eigen::Index l = v.cols();
  if (l < 1 || v.rows() < l) throw ParameterError("osa", std::string(which) + " basis has invalid shape");
  if ((v.transpose() * v - Eigen::MatrixXd::Identity(l, l)).norm() > 1e-6) {
    throw ParameterError("osa", std::string(which) + " basis is not column-orthonormal");
  }
}

std::pair<Eigen::MatrixXd, double> minimize_alignment(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vc, int iters,
                                                      double lr, std::mt19937_64& rng) {
  const Eigen::Index l = va.cols();
  if (l == 1) {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    return {one, osa_loss(va, vc, one)};
  }
  const Eigen::Index np = l * (l - 1) / 2;
  std::normal_distribution<double> init(0.0, 1e-3);
  Eigen::VectorXd theta(np);
  for (Eigen::Index i = 0; i < np; ++i) theta(i) = init(rng);

  auto loss_at = [&](const Eigen::VectorXd& t) { return osa_loss(va, vc, expm_skew(skew_from_params(t, l))); };
  constexpr double kStep = 1e-6;
  Eigen::VectorXd grad(np);
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd probe = theta;
    for (Eigen::Index i = 0; i < np; ++i) {
      probe(i) = theta(i) + kStep;
      const double up = loss_at(probe);
      probe(i) = theta(i) - kStep;
      const double down = loss_at(probe);
      probe(i) = theta(i);
      grad(i) = (up - down) / (2.0 * kStep);
    }
    theta -= lr * grad;
  }
  const Eigen::MatrixXd r = expm_skew(skew_from_params(theta, l));
  return {r, osa_loss(va, vc, r)};
}

}  // namespace

LocalAlignment align_local_pair(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vc, int iters, double lr,
                                std::uint64_t seed) {
  check_orthonormal(va, "source");
  check_orthonormal(vc, "target");
  if (va.rows() != vc.rows() || va.cols() != vc.cols()) {
    throw ParameterError("osa", "align_local_pair: basis shapes differ");
  }
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd va_flip = flip_first_column(va);
  const Eigen::MatrixXd vc_flip = flip_first_column(vc);
  const std::array<const Eigen::MatrixXd*, 2> a_side{&va, &va_flip};
  const std::array<const Eigen::MatrixXd*, 2> c_side{&vc, &vc_flip};

  LocalAlignment out;
  for (int af = 0; af < 2; ++af) {
    for (int cf = 0; cf < 2; ++cf) {
      const auto idx = static_cast<std::size_t>(pair_orientation(af != 0, cf != 0));
      auto [r, loss] = minimize_alignment(*a_side[static_cast<std::size_t>(af)], *c_side[static_cast<std::size_t>(cf)],
                                          iters, lr, rng);
      out.rotations[idx] = std::move(r);
      out.losses[idx] = loss;
    }
  }
  return out;
}

OsaResult osa_align(const PointMatrix& points, const std::vector<Eigen::MatrixXd>& normals, const OsaOptions& options) {
  const Eigen::Index n = points.rows();
  if (static_cast<Eigen::Index>(normals.size()) != n) {
    throw ParameterError("osa", "osa_align: one normal basis per point required");
  }
  if (n == 0) throw ParameterError("osa", "osa_align: empty dataset");
  const Eigen::Index l = normals.front().cols();
  for (const auto& v : normals) {
    if (v.cols() != l || v.rows() != points.cols()) {
      throw ParameterError("osa", "osa_align: normal bases must share one codimension");
    }
  }

  OsaResult res;
  res.aligned.resize(static_cast<std::size_t>(n));
  res.flipped.assign(static_cast<std::size_t>(n), false);
  res.chosen_loss.assign(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    res.aligned[0] = normals[0];
    res.graph = bfs_tree(1, {}, 0);
    return res;
  }

  const NeighborGraph graph = build_neighbor_graph(points, options.h);
  res.h_used = graph.h_used;
  res.graph = bfs_tree(n, minimum_spanning_tree(graph), 0);
  const auto edges = res.graph.edges();

  // Per-edge seeds depend only on the edge, so results do not depend on order.
  res.local.resize(edges.size());
  std::vector<std::size_t> edge_of(static_cast<std::size_t>(n), 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [child, parent] = edges[e];
    const std::uint64_t edge_seed = options.seed * 0x9e3779b97f4a7c15ULL ^
                                    (static_cast<std::uint64_t>(child) * 0xbf58476d1ce4e5b9ULL) ^
                                    static_cast<std::uint64_t>(parent);
    res.local[e] = align_local_pair(normals[static_cast<std::size_t>(child)], normals[static_cast<std::size_t>(parent)],
                                    options.iters, options.lr, edge_seed);
    res.local[e].a = child;
    res.local[e].c = parent;
    edge_of[static_cast<std::size_t>(child)] = e;
  }

  std::vector<Eigen::MatrixXd> global_rot(static_cast<std::size_t>(n));
  const auto root = static_cast<std::size_t>(res.graph.root);
  global_rot[root] = Eigen::MatrixXd::Identity(l, l);
  res.aligned[root] = normals[root];
  for (Eigen::Index v : res.graph.bfs_order) {
    const auto vi = static_cast<std::size_t>(v);
    if (vi == root) continue;
    const auto pi = static_cast<std::size_t>(res.graph.parent[vi]);
    const LocalAlignment& la = res.local[edge_of[vi]];
    const bool parent_flipped = res.flipped[pi];
    const auto keep = static_cast<std::size_t>(pair_orientation(false, parent_flipped));
    const auto flip = static_cast<std::size_t>(pair_orientation(true, parent_flipped));
    const bool child_flipped = !(la.losses[keep] < la.losses[flip]);
    const std::size_t chosen = child_flipped ? flip : keep;
    res.flipped[vi] = child_flipped;
    res.chosen_loss[vi] = la.losses[chosen];
    global_rot[vi] = la.rotations[chosen] * global_rot[pi];
    res.aligned[vi] = (child_flipped ? flip_first_column(normals[vi]) : normals[vi]) * global_rot[vi];
  }
  return res;
}

}  // namespace ecomann
