#pragma once

// Sequential constrained motion planning: one RRT* tree per stage, grown on
// the current manifold until it touches the next one.

#include "ecomann/manifold.hpp"
#include "ecomann/projection.hpp"

#include <cstdint>
#include <iosfwd>

namespace ecomann {

struct RrtParams {
  double step = 0.15;          // steering distance delta
  double rewire_radius = 0.4;
  int max_nodes = 3000;
  double goal_bias = 0.1;      // probability of steering toward the intersection
};

struct PlanningProblem {
  std::vector<ManifoldPtr> manifolds;  // M_1 .. M_{m+1}
  Configuration q_start;
  Eigen::VectorXd box_lo;  // sampling box shared by all stages
  Eigen::VectorXd box_hi;
  double on_manifold_tol = 0.05;
  double reach_tol = 0.05;
  RrtParams rrt;
  ProjectionOptions projection;
  std::uint64_t seed = 0;
};

struct RrtTree {
  std::vector<Configuration> nodes;
  std::vector<long> parent;  // -1 at the root
  std::vector<double> cost;  // path length from the root
};

struct StageResult {
  bool success = false;
  RrtTree tree;
  long reached = -1;                  // node on both manifolds, end of the stage
  std::vector<Configuration> path;    // root .. reached
};

/// Grows a tree on `current` from q_start until a node satisfies
/// ||h_next|| <= reach_tol. That node is then projected onto current and next
/// jointly and appended, so the stage ends on the intersection.
StageResult rrt_star_stage(const ImplicitManifold& current, const ImplicitManifold& next, const Configuration& q_start,
                           const PlanningProblem& problem, std::uint64_t seed);

struct PlannedPath {
  std::vector<std::vector<Configuration>> stages;
  double total_cost = 0.0;
  long nodes_explored = 0;
};

/// Runs one stage per consecutive manifold pair; the end of stage i is the
/// start of stage i+1. Throws PlanningError naming the failed stage.
PlannedPath sequential_plan(const PlanningProblem& problem);

struct PathReport {
  bool valid = true;
  std::vector<double> max_residual;  // per stage
  std::vector<std::string> issues;   // "stage s index i: ..."
};

PathReport validate_path(const PlannedPath& path, const PlanningProblem& problem);

double path_cost(const std::vector<Configuration>& waypoints);

/// stage,index,q1..qd
void write_path_csv(std::ostream& out, const PlannedPath& path);

// ---- hourglass scenario ----------------------------------------------------

/// Paraboloids z = +/-(x^2 + y^2 + 0.5) joined by a unit sphere centred at the
/// origin; they cut the sphere in circles at |z| = (sqrt(7) - 1) / 2. The point
/// starts at (1, 0, 1.5) on the upper paraboloid and must reach (-1, 0, -1.5)
/// on the lower one.
inline constexpr double kHourglassApexOffset = 0.5;

PlanningProblem hourglass_problem(ManifoldPtr sphere, std::uint64_t seed);

}  // namespace ecomann
