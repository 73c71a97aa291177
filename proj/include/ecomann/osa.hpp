#pragma once

// Orthogonal subspace alignment: make per-point normal-space bases globally
// consistent by aligning neighbours on a spanning tree with rotations in SO(l).

#include "ecomann/common.hpp"

#include <array>
#include <cstdint>

namespace ecomann {

struct WeightedEdge {
  Eigen::Index a = 0;
  Eigen::Index b = 0;
  double weight = 0.0;
};

struct NeighborGraph {
  Eigen::Index num_nodes = 0;
  std::vector<WeightedEdge> edges;  // undirected, a < b, unique
  int h_used = 0;                   // neighbour count after escalation
};

/// Union of H-nearest-neighbour edges weighted by Euclidean distance. H is
/// doubled (capped at N-1) until the graph is connected.
NeighborGraph build_neighbor_graph(const PointMatrix& points, int h);

bool is_connected(Eigen::Index num_nodes, const std::vector<WeightedEdge>& edges);

/// Kruskal MST. Ties are broken by the (a, b) edge index.
std::vector<WeightedEdge> minimum_spanning_tree(const NeighborGraph& graph);

/// Tree oriented away from a root by breadth-first traversal.
struct AlignmentGraph {
  Eigen::Index root = 0;
  std::vector<Eigen::Index> parent;  // -1 at the root
  std::vector<std::vector<Eigen::Index>> children;
  std::vector<Eigen::Index> bfs_order;  // root first

  /// Directed (child, parent) pairs in BFS order.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> edges() const;
};

AlignmentGraph bfs_tree(Eigen::Index num_nodes, const std::vector<WeightedEdge>& tree_edges, Eigen::Index root = 0);

/// Orientation pairs, child side first: "a+c+" means neither basis is
/// flipped, "a-c+" means the child's first column is negated, and so on.
enum class PairOrientation : int { kAfwdCfwd = 0, kAfwdCflip = 1, kAflipCfwd = 2, kAflipCflip = 3 };

inline PairOrientation pair_orientation(bool child_flipped, bool parent_flipped) {
  return static_cast<PairOrientation>(2 * int(child_flipped) + int(parent_flipped));
}

std::string to_string(PairOrientation o);

struct LocalAlignment {
  Eigen::Index a = 0;  // child (source)
  Eigen::Index c = 0;  // parent (target)
  std::array<Eigen::MatrixXd, 4> rotations;
  std::array<double, 4> losses{};
};

/// ||I - (Va R)^T Vc||_F^2
double osa_loss(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vc, const Eigen::MatrixXd& r);

/// Copy of v with its first column negated.
Eigen::MatrixXd flip_first_column(const Eigen::MatrixXd& v);

/// Optimises R = expm(L) for the four sign-flip pairs of (Va, Vc) by gradient
/// descent from a near-identity start. For l = 1 the losses are evaluated at R = 1.
LocalAlignment align_local_pair(const Eigen::MatrixXd& va, const Eigen::MatrixXd& vc, int iters = 200,
                                double lr = 0.1, std::uint64_t seed = 0);

struct OsaOptions {
  int h = 5;
  int iters = 200;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

struct OsaResult {
  std::vector<Eigen::MatrixXd> aligned;  // one d x l basis per point
  AlignmentGraph graph;
  std::vector<LocalAlignment> local;  // indexed like graph.edges()
  std::vector<bool> flipped;          // committed orientation per point
  std::vector<double> chosen_loss;    // loss of the selected pair per point (0 at root)
  int h_used = 0;
};

OsaResult osa_align(const PointMatrix& points, const std::vector<Eigen::MatrixXd>& normals,
                    const OsaOptions& options = {});

}  // namespace ecomann
