#pragma once

#include <span>
#include <vector>

#include "scenesynth/band_solver.hpp"
#include "scenesynth/planner.hpp"

namespace scenesynth::refine {

struct RefinementParams {
  double w_accel = 1.0;   // omega1
  double w_jerk = 1.0;    // omega2
  double w_track = 10.0;  // omega3
  double dt_fine = 0.1;
  int substeps = 5;  // k, with substeps * dt_fine == planner dt
  // Added to w_accel. Zero solves the problem as posed; a singular system
  // then raises SingularSystemError.
  double regularization = 0.0;

  void validate() const;
};

struct RefinedTrajectory {
  std::vector<double> timestamps;
  std::vector<double> s_values;
  std::vector<double> accel;  // accel_of(s_values), samples 1 .. n-2
  std::vector<double> jerk;   // jerk_of(s_values), samples 1 .. n-3
};

// (s[i+1] - 2 s[i] + s[i-1]) / dt^2 for i = 1 .. n-2. Needs >= 3 samples.
std::vector<double> accel_of(std::span<const double> s, double dt);
// (s[i+2] - 3 s[i+1] + 3 s[i] - s[i-1]) / dt^3 for i = 1 .. n-3. Needs >= 4 samples.
std::vector<double> jerk_of(std::span<const double> s, double dt);

// Fine-grid values of the coarse plan's constant-acceleration motion; equal
// to the plan nodes at every k-th sample.
std::vector<double> coarse_interpolant(const planner::CoarsePlan& coarse, const RefinementParams& p);

struct KktSolution {
  std::vector<double> s_values;
  std::vector<double> multipliers;  // [position constraint, velocity constraint]
};

// Smoothing problem over the fine grid spanning the coarse plan:
//
//   min  sum w1 a(T)^2 + w2 j(T)^2 + sum_{T = k dt, 2k dt, ...} w3 (s(T) - s_c(T))^2
//   s.t. s(T0) = s0,  (s(T0 + dt) - s(T0)) / dt = v0
//
// where acceleration and jerk terms only cover samples with a full stencil.
// The stationarity system is assembled as a band matrix with the two
// multipliers ordered first, which keeps the half-bandwidth at 3.
class RefinementProblem {
 public:
  RefinementProblem(const planner::CoarsePlan& coarse, const RefinementParams& p, double v0, double s0);

  std::size_t size() const { return n_; }
  const std::vector<double>& tracked_values() const { return tracked_; }

  double objective(std::span<const double> s) const;
  std::vector<double> gradient(std::span<const double> s) const;
  // {s(T0) - s0, v(T0) - v0}
  std::pair<double, double> constraint_residuals(std::span<const double> s) const;

  BandMatrix kkt_matrix() const;
  std::vector<double> kkt_rhs() const;

  KktSolution solve() const;

  // ||grad + A^T lambda||_inf scaled by the magnitude of the terms it sums.
  double stationarity_residual(const KktSolution& sol) const;

  double dt() const { return p_.dt_fine; }
  double t0() const { return t0_; }

 private:
  RefinementParams p_;
  std::size_t n_;
  double v0_, s0_, t0_;
  std::vector<double> tracked_;  // coarse node s for tracked knots 1..M
};

RefinedTrajectory refine_trajectory(const planner::CoarsePlan& coarse, const RefinementParams& p, double v0,
                                    double s0);

}  // namespace scenesynth::refine
