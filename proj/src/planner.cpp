#include "scenesynth/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_set>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth::planner {
namespace {

// Slack on the terminal-time test so accumulated dt round-off cannot end the
// search a step early.
constexpr double kTimeSlack = 1e-9;

bool is_terminal(double t, double horizon) { return t > horizon + kTimeSlack; }

struct StateKey {
  int step;
  std::int64_t s;
  std::int64_t v;
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.step) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

std::int64_t quantize(double x, double resolution) {
  if (resolution > 0.0) return static_cast<std::int64_t>(std::floor(x / resolution));
  return std::llround(x * 1e9);
}

struct SearchNode {
  PlannerNode node;
  double g;
  int step;
  int parent;
  double action;
  double step_cost;
};

struct QueueEntry {
  double g;
  double v;
  double s;
  std::size_t seq;
  int index;
};

// std::priority_queue pops the largest element; invert to pop the best.
struct WorseThan {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.g != b.g) return a.g > b.g;
    if (a.v != b.v) return a.v > b.v;
    if (a.s != b.s) return a.s > b.s;
    return a.seq > b.seq;
  }
};

}  // namespace

void PlannerParams::validate() const {
  if (!(dt > 0.0)) throw DomainError(fmt::format("planner dt must be positive, got {}", dt));
  if (!(horizon > 0.0)) throw DomainError(fmt::format("planner horizon must be positive, got {}", horizon));
  if (action_set.empty()) throw DomainError("planner action set is empty");
  for (double a : action_set) {
    if (!(a >= kMinAction && a <= kMaxAction)) {
      throw DomainError(fmt::format("action {} outside [{}, {}]", a, kMinAction, kMaxAction));
    }
  }
  if (!(w_accel >= 0.0 && w_curvature >= 0.0 && w_speed >= 0.0)) {
    throw DomainError("planner weights must be nonnegative");
  }
  if (!std::isfinite(desired_speed)) throw DomainError("desired speed must be finite");
  if (s_resolution < 0.0 || v_resolution < 0.0) throw DomainError("closed-set resolution must be >= 0");
}

double CoarsePlan::s_at(double t) const {
  if (nodes.empty()) throw DomainError("empty coarse plan");
  if (t <= nodes.front().t) return nodes.front().s;
  if (t >= nodes.back().t) return nodes.back().s;
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                                   [](double value, const PlannerNode& n) { return value < n.t; });
  const auto i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  if (nodes[i].t == t) return nodes[i].s;
  const double tau = t - nodes[i].t;
  return nodes[i].s + nodes[i].v * tau + 0.5 * actions[i] * tau * tau;
}

PlannerNode expand(const PlannerNode& n, double a, double dt) {
  return {n.s + n.v * dt + 0.5 * a * dt * dt, n.v + a * dt, n.t + dt};
}

double transition_cost(const PlannerNode& next, double a, const ReferencePath& path, const PlannerParams& p) {
  double kappa = path.curvature_at(next.s);
  if (p.abs_curvature) kappa = std::abs(kappa);
  const double dv = next.v - p.desired_speed;
  return p.w_accel * a * a + p.w_curvature * kappa * next.v * next.v + p.w_speed * dv * dv;
}

int horizon_steps(const PlannerNode& init, const PlannerParams& p) {
  int steps = 0;
  double t = init.t;
  while (!is_terminal(t, p.horizon)) {
    t += p.dt;
    ++steps;
  }
  return steps;
}

CoarsePlan astar_plan(const ReferencePath& path, const PlannerNode& init, const PlannerParams& p) {
  p.validate();
  if (!(init.v >= 0.0)) throw DomainError(fmt::format("initial speed must be >= 0, got {}", init.v));
  if (!(init.s >= 0.0 && init.s <= path.length())) {
    throw PathOverrunError(fmt::format("initial arc-length {} outside path [0, {}]", init.s, path.length()));
  }

  std::vector<SearchNode> arena;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, WorseThan> open;
  std::unordered_set<StateKey, StateKeyHash> closed;
  std::size_t seq = 0;

  // Signed curvature can make transition costs negative, which uniform-cost
  // search cannot handle. Every terminal node sits at the same depth, so a
  // constant per-step offset that bounds the most negative cost from below
  // ranks complete plans exactly as their true costs do.
  double step_offset = 0.0;
  if (!p.abs_curvature) {
    const double k_min = *std::min_element(path.kappa().begin(), path.kappa().end());
    const double a_max = std::max(0.0, *std::max_element(p.action_set.begin(), p.action_set.end()));
    const double v_max = init.v + a_max * p.dt * horizon_steps(init, p);
    step_offset = std::max(0.0, -k_min) * p.w_curvature * v_max * v_max;
  }
  auto priority = [&](const SearchNode& n) { return n.g + step_offset * n.step; };

  auto key_of = [&](const SearchNode& n) {
    return StateKey{n.step, quantize(n.node.s, p.s_resolution), quantize(n.node.v, p.v_resolution)};
  };

  arena.push_back({init, 0.0, 0, -1, 0.0, 0.0});
  open.push({0.0, init.v, init.s, seq++, 0});

  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    const SearchNode current = arena[static_cast<std::size_t>(top.index)];
    if (!closed.insert(key_of(current)).second) continue;

    if (is_terminal(current.node.t, p.horizon)) {
      CoarsePlan plan;
      for (int i = top.index; i >= 0; i = arena[static_cast<std::size_t>(i)].parent) {
        const SearchNode& n = arena[static_cast<std::size_t>(i)];
        plan.nodes.push_back(n.node);
        if (n.parent >= 0) {
          plan.actions.push_back(n.action);
          plan.step_costs.push_back(n.step_cost);
        }
      }
      std::reverse(plan.nodes.begin(), plan.nodes.end());
      std::reverse(plan.actions.begin(), plan.actions.end());
      std::reverse(plan.step_costs.begin(), plan.step_costs.end());
      plan.total_cost = current.g;
      return plan;
    }

    for (double a : p.action_set) {
      const PlannerNode next = expand(current.node, a, p.dt);
      if (next.v < 0.0) continue;
      if (next.s > path.length()) {
        throw PathOverrunError(
            fmt::format("expansion reached s = {:.3f} m beyond path length {:.3f} m", next.s, path.length()));
      }
      const double cost = transition_cost(next, a, path, p);
      SearchNode child{next, current.g + cost, current.step + 1, top.index, a, cost};
      if (closed.contains(key_of(child))) continue;
      arena.push_back(child);
      open.push({priority(child), next.v, next.s, seq++, static_cast<int>(arena.size() - 1)});
    }
  }
  throw PlanningFailure("no feasible terminal node: every expansion was pruned");
}

std::vector<TimedPoint> plan_to_global(const CoarsePlan& plan, const ReferencePath& path) {
  std::vector<TimedPoint> out;
  out.reserve(plan.nodes.size());
  for (const PlannerNode& n : plan.nodes) out.push_back({n.t, path.position_at(n.s)});
  return out;
}

}  // namespace scenesynth::planner
