#include "ecomann/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

namespace ecomann {

namespace {

std::uint64_t stage_seed(std::uint64_t seed, std::size_t stage) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stage + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double residual(const ImplicitManifold& m, const Eigen::VectorXd& q) { return m.evaluate(q).norm(); }

void check_problem(const PlanningProblem& p) {
  if (p.manifolds.size() < 2) throw ParameterError("planner", "need at least two manifolds (one stage)");
  const int d = static_cast<int>(p.q_start.size());
  for (const auto& m : p.manifolds) {
    if (!m) throw ParameterError("planner", "null manifold in sequence");
    if (m->ambient_dim() != d) throw ParameterError("planner", "manifold '" + m->name() + "' has the wrong ambient dimension");
  }
  if (p.box_lo.size() != d || p.box_hi.size() != d) throw ParameterError("planner", "sampling box dimension mismatch");
  if (!(p.on_manifold_tol > 0.0) || !(p.reach_tol > 0.0)) throw ParameterError("planner", "tolerances must be positive");
  if (!(p.rrt.step > 0.0) || !(p.rrt.rewire_radius > 0.0) || p.rrt.max_nodes < 1)
    throw ParameterError("planner", "invalid RRT parameters");
  if (p.rrt.goal_bias < 0.0 || p.rrt.goal_bias > 1.0) throw ParameterError("planner", "goal bias must lie in [0, 1]");
}

class TreeBuilder {
 public:
  TreeBuilder(const ImplicitManifold& current, const PlanningProblem& problem)
      : current_(current), problem_(problem) {}

  RrtTree tree;

  void add_root(const Configuration& q) {
    tree.nodes.push_back(q);
    tree.parent.push_back(-1);
    tree.cost.push_back(0.0);
    children_.emplace_back();
  }

  long add(const Configuration& q, long parent) {
    tree.nodes.push_back(q);
    tree.parent.push_back(parent);
    tree.cost.push_back(tree.cost[parent] + (q - tree.nodes[parent]).norm());
    children_.emplace_back();
    children_[parent].push_back(static_cast<long>(tree.nodes.size()) - 1);
    return static_cast<long>(tree.nodes.size()) - 1;
  }

  long nearest(const Configuration& q) const {
    long best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const double d = (tree.nodes[i] - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<long>(i);
      }
    }
    return best;
  }

  std::vector<long> near(const Configuration& q, double radius) const {
    std::vector<long> out;
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
      if ((tree.nodes[i] - q).squaredNorm() <= r2) out.push_back(static_cast<long>(i));
    return out;
  }

  /// Endpoints are on the manifold by construction; the chord midpoint must
  /// stay close to it too.
  bool edge_valid(const Configuration& a, const Configuration& b) const {
    return residual(current_, 0.5 * (a + b)) <= 2.0 * problem_.on_manifold_tol;
  }

  void reparent(long node, long new_parent) {
    auto& siblings = children_[tree.parent[node]];
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    children_[new_parent].push_back(node);
    tree.parent[node] = new_parent;
    const double delta = tree.cost[new_parent] + (tree.nodes[node] - tree.nodes[new_parent]).norm() - tree.cost[node];
    std::vector<long> stack{node};
    while (!stack.empty()) {
      const long n = stack.back();
      stack.pop_back();
      tree.cost[n] += delta;
      for (long c : children_[n]) stack.push_back(c);
    }
  }

  std::vector<Configuration> chain_to(long node) const {
    std::vector<Configuration> path;
    for (long n = node; n >= 0; n = tree.parent[n]) path.push_back(tree.nodes[n]);
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  const ImplicitManifold& current_;
  const PlanningProblem& problem_;
  std::vector<std::vector<long>> children_;
};

}  // namespace

double path_cost(const std::vector<Configuration>& waypoints) {
  double c = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) c += (waypoints[i] - waypoints[i - 1]).norm();
  return c;
}

StageResult rrt_star_stage(const ImplicitManifold& current, const ImplicitManifold& next, const Configuration& q_start,
                           const PlanningProblem& problem, std::uint64_t seed) {
  const double tol = problem.on_manifold_tol;
  if (residual(current, q_start) > tol) {
    throw PlanningError("planner", "stage start is off the current manifold '" + current.name() + "'");
  }
  const auto cur_ptr = std::shared_ptr<const ImplicitManifold>(&current, [](const ImplicitManifold*) {});
  const auto next_ptr = std::shared_ptr<const ImplicitManifold>(&next, [](const ImplicitManifold*) {});
  const StackedManifold both({cur_ptr, next_ptr});

  TreeBuilder b(current, problem);
  b.add_root(q_start);
  StageResult result;

  // Snap a node that touches the next manifold onto the intersection.
  auto try_finish = [&](long node) {
    const Configuration& q = b.tree.nodes[node];
    const ProjectionResult pr = project(both, q, problem.projection);
    if (residual(current, pr.q) > tol || residual(next, pr.q) > tol) return false;
    if ((pr.q - q).norm() > 2.0 * problem.rrt.step || !b.edge_valid(q, pr.q)) return false;
    long end = node;
    if ((pr.q - q).norm() > 1e-12) end = b.add(pr.q, node);
    result.success = true;
    result.reached = end;
    result.path = b.chain_to(end);
    return true;
  };

  if (residual(next, q_start) <= problem.reach_tol && try_finish(0)) {
    result.tree = std::move(b.tree);
    return result;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index d = q_start.size();
  long best_next = 0;
  double best_next_r = residual(next, q_start);

  // Samples can keep failing (e.g. a manifold with little area in the box), so
  // the number of attempts is bounded as well.
  const long max_attempts = 50L * problem.rrt.max_nodes;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(b.tree.nodes.size()) < problem.rrt.max_nodes;
       ++attempt) {
    Configuration target(d);
    if (unit(rng) < problem.rrt.goal_bias) {
      target = project(both, b.tree.nodes[best_next], problem.projection).q;
    } else {
      for (Eigen::Index i = 0; i < d; ++i)
        target(i) = problem.box_lo(i) + (problem.box_hi(i) - problem.box_lo(i)) * unit(rng);
    }
    const long near_idx = b.nearest(target);
    const Configuration& q_near = b.tree.nodes[near_idx];
    Configuration dir = target - q_near;
    const double dist = dir.norm();
    if (dist < 1e-12) continue;
    const Configuration q_steer = dist > problem.rrt.step ? Configuration(q_near + dir * (problem.rrt.step / dist)) : target;

    const ProjectionResult pr = project(current, q_steer, problem.projection);
    if (!pr.converged || residual(current, pr.q) > tol) continue;
    const Configuration q_new = pr.q;
    const double hop = (q_new - q_near).norm();
    if (hop < 1e-9 || hop > 2.0 * problem.rrt.step || !b.edge_valid(q_near, q_new)) continue;

    // choose the cheapest valid parent in the neighbourhood
    const std::vector<long> neighbours = b.near(q_new, problem.rrt.rewire_radius);
    long parent = near_idx;
    double best_cost = b.tree.cost[near_idx] + hop;
    for (long n : neighbours) {
      const double c = b.tree.cost[n] + (q_new - b.tree.nodes[n]).norm();
      if (c < best_cost && b.edge_valid(b.tree.nodes[n], q_new)) {
        best_cost = c;
        parent = n;
      }
    }
    const long id = b.add(q_new, parent);

    for (long n : neighbours) {
      if (n == parent) continue;
      const double c = b.tree.cost[id] + (b.tree.nodes[n] - q_new).norm();
      if (c + 1e-12 < b.tree.cost[n] && b.edge_valid(q_new, b.tree.nodes[n])) b.reparent(n, id);
    }

    const double rn = residual(next, q_new);
    if (rn < best_next_r) {
      best_next_r = rn;
      best_next = id;
    }
    if (rn <= problem.reach_tol && try_finish(id)) break;
  }
  result.tree = std::move(b.tree);
  return result;
}

PlannedPath sequential_plan(const PlanningProblem& problem) {
  check_problem(problem);
  PlannedPath out;
  Configuration start = problem.q_start;
  for (std::size_t s = 0; s + 1 < problem.manifolds.size(); ++s) {
    StageResult st =
        rrt_star_stage(*problem.manifolds[s], *problem.manifolds[s + 1], start, problem, stage_seed(problem.seed, s));
    out.nodes_explored += static_cast<long>(st.tree.nodes.size());
    if (!st.success) {
      throw PlanningError("planner", "stage " + std::to_string(s + 1) + " failed to reach '" +
                                         problem.manifolds[s + 1]->name() + "' within " +
                                         std::to_string(problem.rrt.max_nodes) + " nodes");
    }
    out.total_cost += path_cost(st.path);
    start = st.path.back();
    out.stages.push_back(std::move(st.path));
  }
  return out;
}

PathReport validate_path(const PlannedPath& path, const PlanningProblem& problem) {
  if (path.stages.empty()) throw ParameterError("planner", "validate_path: empty path");
  if (path.stages.size() + 1 != problem.manifolds.size())
    throw ParameterError("planner", "validate_path: stage count does not match the manifold sequence");
  PathReport rep;
  auto flag = [&](std::size_t s, std::size_t i, const std::string& what) {
    rep.valid = false;
    rep.issues.push_back("stage " + std::to_string(s + 1) + " index " + std::to_string(i) + ": " + what);
  };
  for (std::size_t s = 0; s < path.stages.size(); ++s) {
    const auto& wp = path.stages[s];
    double worst = 0.0;
    if (wp.empty()) {
      rep.valid = false;
      rep.issues.push_back("stage " + std::to_string(s + 1) + ": no waypoints");
      rep.max_residual.push_back(0.0);
      continue;
    }
    for (std::size_t i = 0; i < wp.size(); ++i) {
      const double r = residual(*problem.manifolds[s], wp[i]);
      worst = std::max(worst, r);
      if (!(r <= problem.on_manifold_tol)) flag(s, i, "off-manifold residual " + std::to_string(r));
    }
    rep.max_residual.push_back(worst);
    if (residual(*problem.manifolds[s + 1], wp.back()) > problem.on_manifold_tol)
      flag(s, wp.size() - 1, "stage end is not on the next manifold");
    if (s + 1 < path.stages.size() && !path.stages[s + 1].empty() &&
        (wp.back() - path.stages[s + 1].front()).norm() > 1e-12)
      flag(s, wp.size() - 1, "discontinuous with the next stage");
  }
  if ((path.stages.front().front() - problem.q_start).norm() > 1e-12) flag(0, 0, "does not begin at q_start");
  return rep;
}

void write_path_csv(std::ostream& out, const PlannedPath& path) {
  const Eigen::Index d = path.stages.empty() || path.stages.front().empty() ? 0 : path.stages.front().front().size();
  out << "stage,index";
  for (Eigen::Index j = 0; j < d; ++j) out << ",q" << (j + 1);
  out << '\n';
  char buf[64];
  for (std::size_t s = 0; s < path.stages.size(); ++s) {
    for (std::size_t i = 0; i < path.stages[s].size(); ++i) {
      out << (s + 1) << ',' << i;
      for (Eigen::Index j = 0; j < d; ++j) {
        std::snprintf(buf, sizeof buf, ",%.17g", path.stages[s][i](j));
        out << buf;
      }
      out << '\n';
    }
  }
}

PlanningProblem hourglass_problem(ManifoldPtr sphere, std::uint64_t seed) {
  if (!sphere || sphere->ambient_dim() != 3 || sphere->codim() != 1)
    throw ParameterError("planner", "hourglass: the connecting manifold must be a surface in R^3");
  PlanningProblem p;
  p.manifolds = {std::make_shared<ParaboloidManifold>(1.0, kHourglassApexOffset), std::move(sphere),
                 std::make_shared<ParaboloidManifold>(-1.0, kHourglassApexOffset),
                 std::make_shared<PointManifold>(Eigen::Vector3d(-1.0, 0.0, -1.5))};
  p.q_start = Eigen::Vector3d(1.0, 0.0, 1.5);
  p.box_lo = Eigen::Vector3d::Constant(-2.0);
  p.box_hi = Eigen::Vector3d::Constant(2.0);
  p.seed = seed;
  return p;
}

}  // namespace ecomann
