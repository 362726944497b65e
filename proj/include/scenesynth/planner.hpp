#pragma once

#include <vector>

#include "scenesynth/geometry.hpp"
#include "scenesynth/reference_path.hpp"

namespace scenesynth::planner {

struct PlannerNode {
  double s = 0.0;  // arc-length on the reference path (m)
  double v = 0.0;  // m/s
  double t = 0.0;  // s

  friend bool operator==(const PlannerNode&, const PlannerNode&) = default;
};

struct PlannerParams {
  std::vector<double> action_set{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0};
  double dt = 0.5;
  double w_accel = 5.0;
  double w_curvature = 5.0;
  double w_speed = 1.0;
  double desired_speed = 10.0;
  double horizon = 5.0;  // t_g
  // Use |kappa| in the curvature term. Off evaluates the signed curvature.
  bool abs_curvature = true;
  // Closed-set quantization of s and v. Zero keys states by their exact
  // values (to 1e-9), which keeps the search exactly optimal.
  double s_resolution = 0.0;
  double v_resolution = 0.0;

  static constexpr double kMinAction = -2.0;
  static constexpr double kMaxAction = 1.0;

  // Throws DomainError on an invalid field.
  void validate() const;
};

struct CoarsePlan {
  std::vector<PlannerNode> nodes;
  std::vector<double> actions;
  std::vector<double> step_costs;
  double total_cost = 0.0;

  // Arc-length at time t, integrating the constant-acceleration motion of
  // the covering step exactly. t outside [front.t, back.t] is clamped.
  double s_at(double t) const;
};

// Constant-acceleration step: (s + v dt + a dt^2 / 2, v + a dt, t + dt).
// Negative resulting speeds are returned as-is; the search prunes them.
PlannerNode expand(const PlannerNode& n, double a, double dt);

// w1 a^2 + w2 kappa(s') v'^2 + w3 (v' - v_d)^2 for the node reached by a.
// Throws PathOverrunError when next.s lies outside the path.
double transition_cost(const PlannerNode& next, double a, const ReferencePath& path, const PlannerParams& p);

// Uniform-cost (zero-heuristic A*) search for the cheapest action sequence
// whose terminal node is the first with t > horizon. Ties between equal
// costs prefer lower v, then lower s. Throws PlanningFailure when every
// branch is pruned and PathOverrunError when an expansion leaves the path.
CoarsePlan astar_plan(const ReferencePath& path, const PlannerNode& init, const PlannerParams& p);

// Number of expansions from init until the terminal time is passed.
int horizon_steps(const PlannerNode& init, const PlannerParams& p);

struct TimedPoint {
  double t = 0.0;
  Point2 pos;
};

std::vector<TimedPoint> plan_to_global(const CoarsePlan& plan, const ReferencePath& path);

}  // namespace scenesynth::planner
