#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance suite. Each one is written from the mathematical definition,
// not from the library code it checks.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scenesynth/geometry.hpp"
#include "scenesynth/planner.hpp"
#include "scenesynth/reference_path.hpp"
#include "scenesynth/refine.hpp"
#include "scenesynth/rng.hpp"
#include "scenesynth/scene.hpp"

namespace oracle {

using scenesynth::Point2;

// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct Band {
  double lo, hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline Band binomial_band99(double p, std::size_t n) {
  const double half = kZ99 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return {p - half, p + half};
}

// --- paths --------------------------------------------------------------------

inline scenesynth::Polyline straight_line(double length, double step, Point2 origin = {}, double heading = 0.0) {
  std::vector<Point2> pts;
  const auto n = static_cast<std::size_t>(std::llround(length / step));
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = length * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back({origin.x + s * std::cos(heading), origin.y + s * std::sin(heading)});
  }
  return scenesynth::Polyline(std::move(pts));
}

// Counter-clockwise arc of `radius` about the origin, from angle a0 to a1,
// with `n` segments.
inline scenesynth::Polyline arc(double radius, double a0, double a1, std::size_t n) {
  std::vector<Point2> pts;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return scenesynth::Polyline(std::move(pts));
}

// Gently winding road: y = amp * sin(x / wavelength), densely sampled.
inline scenesynth::Polyline wavy_line(double length, double amp, double wavelength) {
  std::vector<Point2> pts;
  for (double x = 0.0; x <= length + 1e-9; x += 0.1) pts.push_back({x, amp * std::sin(x / wavelength)});
  return scenesynth::Polyline(std::move(pts));
}

// Linear interpolation of the per-sample curvature profile at arc-length s.
inline double kappa_at(const scenesynth::ReferencePath& path, double s) {
  const auto& k = path.kappa();
  const double u = s / path.spacing();
  auto i = static_cast<std::size_t>(std::floor(u));
  if (i >= k.size() - 1) return k.back();
  const double f = u - static_cast<double>(i);
  return k[i] + f * (k[i + 1] - k[i]);
}

// --- planner ------------------------------------------------------------------

struct BruteForceResult {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> actions;
  std::size_t sequences = 0;  // feasible sequences evaluated
};

// Exhaustive enumeration of every action sequence with `steps` transitions,
// skipping sequences that drive the speed negative.
inline BruteForceResult brute_force_plan(const scenesynth::ReferencePath& path, double s0, double v0,
                                         const scenesynth::planner::PlannerParams& p, int steps) {
  BruteForceResult best;
  std::vector<double> seq;
  auto recurse = [&](auto&& self, double s, double v, double cost, int depth) -> void {
    if (depth == steps) {
      ++best.sequences;
      if (cost < best.cost) {
        best.cost = cost;
        best.actions = seq;
      }
      return;
    }
    for (double a : p.action_set) {
      const double v1 = v + a * p.dt;
      if (v1 < 0.0) continue;
      const double s1 = s + v * p.dt + 0.5 * a * p.dt * p.dt;
      const double kappa = p.abs_curvature ? std::abs(kappa_at(path, s1)) : kappa_at(path, s1);
      const double c = p.w_accel * a * a + p.w_curvature * kappa * v1 * v1 +
                       p.w_speed * (v1 - p.desired_speed) * (v1 - p.desired_speed);
      seq.push_back(a);
      self(self, s1, v1, cost + c, depth + 1);
      seq.pop_back();
    }
  };
  recurse(recurse, s0, v0, 0.0, 0);
  return best;
}

// Coarse plan obtained by replaying `actions` from (s0, v0, t0); costs are
// left at zero because refinement ignores them.
inline scenesynth::planner::CoarsePlan replay_plan(double s0, double v0, double dt, const std::vector<double>& actions,
                                                   double t0 = 0.0) {
  scenesynth::planner::CoarsePlan plan;
  plan.nodes.push_back({s0, v0, t0});
  for (double a : actions) {
    const auto& n = plan.nodes.back();
    plan.nodes.push_back({n.s + n.v * dt + 0.5 * a * dt * dt, n.v + a * dt, n.t + dt});
    plan.actions.push_back(a);
    plan.step_costs.push_back(0.0);
  }
  return plan;
}

// --- refinement ---------------------------------------------------------------

// Objective written straight from its definition.
inline double refine_objective(const std::vector<double>& s, const scenesynth::planner::CoarsePlan& plan,
                               const scenesynth::refine::RefinementParams& p) {
  const double h = p.dt_fine;
  const std::size_t n = s.size();
  double f = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = (s[i + 1] - 2.0 * s[i] + s[i - 1]) / (h * h);
    f += (p.w_accel + p.regularization) * a * a;
  }
  for (std::size_t i = 1; i + 2 < n; ++i) {
    const double j = (s[i + 2] - 3.0 * s[i + 1] + 3.0 * s[i] - s[i - 1]) / (h * h * h);
    f += p.w_jerk * j * j;
  }
  const auto k = static_cast<std::size_t>(p.substeps);
  for (std::size_t m = 1; m < plan.nodes.size(); ++m) {
    const double d = s[m * k] - plan.nodes[m].s;
    f += p.w_track * d * d;
  }
  return f;
}

struct DenseQp {
  Eigen::MatrixXd hessian;  // f(x) = 1/2 x'Hx + g'x + c
  Eigen::VectorXd linear;
  Eigen::MatrixXd constraints;  // A x = b
  Eigen::VectorXd rhs;
};

// Recovers H and g of the quadratic objective by exact polarization on unit
// vectors, then attaches the two initial-state constraints.
inline DenseQp dense_qp(const scenesynth::planner::CoarsePlan& plan, const scenesynth::refine::RefinementParams& p,
                        double v0, double s0) {
  const std::size_t n = plan.actions.size() * static_cast<std::size_t>(p.substeps) + 1;
  auto f = [&](const std::vector<double>& x) { return refine_objective(x, plan, p); };
  std::vector<double> x(n, 0.0);
  const double f0 = f(x);
  std::vector<double> fi(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 1.0;
    fi[i] = f(x);
    x[i] = 0.0;
  }
  DenseQp qp;
  qp.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  qp.linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double hij;
      if (i == j) {
        x[i] = 1.0;
        const double fp = fi[i];
        x[i] = -1.0;
        const double fm = f(x);
        x[i] = 0.0;
        hij = fp + fm - 2.0 * f0;
        qp.linear(static_cast<Eigen::Index>(i)) = 0.5 * (fp - fm);
      } else {
        // The third-difference stencil couples indices at most 3 apart.
        if (j - i > 3) continue;
        x[i] = 1.0;
        x[j] = 1.0;
        hij = f(x) - fi[i] - fi[j] + f0;
        x[i] = 0.0;
        x[j] = 0.0;
      }
      qp.hessian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hij;
      qp.hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = hij;
    }
  }
  qp.constraints = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(n));
  qp.constraints(0, 0) = 1.0;
  qp.constraints(1, 0) = -1.0 / p.dt_fine;
  qp.constraints(1, 1) = 1.0 / p.dt_fine;
  qp.rhs = Eigen::Vector2d(s0, v0);
  return qp;
}

struct DenseSolution {
  std::vector<double> s;
  Eigen::Vector2d multipliers;
};

// Solved in extended precision so the reference is more accurate than the
// double-precision band solver it checks.
inline DenseSolution solve_dense(const DenseQp& qp) {
  using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const Eigen::Index n = qp.hessian.rows();
  MatrixL kkt = MatrixL::Zero(n + 2, n + 2);
  kkt.topLeftCorner(n, n) = qp.hessian.cast<long double>();
  kkt.topRightCorner(n, 2) = qp.constraints.transpose().cast<long double>();
  kkt.bottomLeftCorner(2, n) = qp.constraints.cast<long double>();
  VectorL rhs(n + 2);
  rhs << -qp.linear.cast<long double>(), qp.rhs.cast<long double>();
  const VectorL z = kkt.fullPivLu().solve(rhs);
  DenseSolution out;
  for (Eigen::Index i = 0; i < n; ++i) out.s.push_back(static_cast<double>(z(i)));
  out.multipliers = Eigen::Vector2d(static_cast<double>(z(n)), static_cast<double>(z(n + 1)));
  return out;
}

// ||H s + g + A' lambda||_inf relative to the largest term in the sum.
inline double dense_stationarity(const DenseQp& qp, const std::vector<double>& s, double lambda_pos,
                                 double lambda_vel) {
  const Eigen::Map<const Eigen::VectorXd> x(s.data(), static_cast<Eigen::Index>(s.size()));
  const Eigen::Vector2d lambda(lambda_pos, lambda_vel);
  const Eigen::VectorXd hx = qp.hessian * x;
  const Eigen::VectorXd at = qp.constraints.transpose() * lambda;
  const Eigen::VectorXd r = hx + qp.linear + at;
  const double scale = std::max({1.0, hx.lpNorm<Eigen::Infinity>(), qp.linear.lpNorm<Eigen::Infinity>(),
                                 at.lpNorm<Eigen::Infinity>()});
  return r.lpNorm<Eigen::Infinity>() / scale;
}

// --- losses and metrics -------------------------------------------------------

// Mean over points of |dx| + |dy|.
inline double l1_points(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i].x - b[i].x) + std::fabs(a[i].y - b[i].y);
  return sum / static_cast<double>(a.size());
}

struct TrajLossRef {
  double loss;
  std::size_t best;
};

inline TrajLossRef traj_loss_ref(const std::vector<std::vector<Point2>>& preds, const std::vector<Point2>& target,
                                 double weight = 0.05) {
  std::vector<double> l;
  for (const auto& m : preds) l.push_back(l1_points(m, target));
  const auto best = static_cast<std::size_t>(std::min_element(l.begin(), l.end()) - l.begin());
  double rest = 0.0;
  for (std::size_t m = 0; m < l.size(); ++m) {
    if (m != best) rest += l[m];
  }
  return {l[best] + weight * rest / static_cast<double>(l.size() - 1), best};
}

struct ForecastRef {
  double ade, fde;
  int miss;
};

inline ForecastRef forecast_ref(const std::vector<std::vector<Point2>>& preds, const std::vector<Point2>& truth,
                                double threshold) {
  std::vector<double> ade;
  std::vector<double> fde;
  for (const auto& m : preds) {
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      total += std::hypot(m[i].x - truth[i].x, m[i].y - truth[i].y);
    }
    ade.push_back(total / static_cast<double>(truth.size()));
    const Point2 e{m.back().x - truth.back().x, m.back().y - truth.back().y};
    fde.push_back(std::hypot(e.x, e.y));
  }
  const auto best_fde = std::min_element(fde.begin(), fde.end());
  return {*std::min_element(ade.begin(), ade.end()), *best_fde, *best_fde > threshold ? 1 : 0};
}

inline std::vector<Point2> random_points(scenesynth::Rng& rng, std::size_t n, double extent) {
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {rng.uniform(-extent, extent), rng.uniform(-extent, extent)};
  return pts;
}

// --- scenes -------------------------------------------------------------------

// Scene with `lanes` parallel straight lanes (`points` points each) and a
// constant-speed trajectory along +x.
inline scenesynth::Scene simple_scene(std::size_t lanes, std::size_t points = 11, double speed = 10.0,
                                      const std::string& id = "0000000") {
  using namespace scenesynth;
  Scene scene;
  scene.scene_id = id;
  scene.city_tag = "PIT";
  scene.map_crop.city_tag = "PIT";
  for (std::size_t l = 0; l < lanes; ++l) {
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < points; ++i) {
      pts.push_back({static_cast<double>(i) * 5.0, 3.5 * static_cast<double>(l)});
    }
    const std::string lane_id = "L" + std::to_string(l);
    scene.map_crop.add_lane({lane_id, Polyline(std::move(pts)), {}, {}});
  }
  for (std::size_t i = 0; i < kSceneSamples; ++i) {
    const double t = static_cast<double>(i) * kSampleInterval;
    scene.trajectory.push_back({t, {speed * t, 0.0}});
  }
  scene.metadata.desired_speed = speed;
  scene.metadata.initial_speed = speed;
  scene.metadata.crop_center = scene.trajectory[kSceneSamples / 2].pos;
  scene.metadata.crop_radius = 100.0;
  return scene;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("scenesynth_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace oracle
