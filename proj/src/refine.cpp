#include "scenesynth/refine.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth::refine {
namespace {

constexpr double kAccelStencil[3] = {1.0, -2.0, 1.0};
constexpr double kJerkStencil[4] = {-1.0, 3.0, -3.0, 1.0};

// Offset of the first unknown (the two multipliers come first).
constexpr std::size_t kOffset = 2;

}  // namespace

void RefinementParams::validate() const {
  if (!(w_accel >= 0.0 && w_jerk >= 0.0)) throw DomainError("refinement weights must be nonnegative");
  if (!(w_track > 0.0)) throw DomainError("tracking weight must be positive");
  if (!(dt_fine > 0.0)) throw DomainError(fmt::format("dt_fine must be positive, got {}", dt_fine));
  if (substeps < 1) throw DomainError(fmt::format("substeps must be >= 1, got {}", substeps));
  if (!(regularization >= 0.0)) throw DomainError("regularization must be >= 0");
}

std::vector<double> accel_of(std::span<const double> s, double dt) {
  if (s.size() < 3) throw DomainError(fmt::format("acceleration needs >= 3 samples, got {}", s.size()));
  std::vector<double> a(s.size() - 2);
  const double inv = 1.0 / (dt * dt);
  for (std::size_t i = 1; i + 1 < s.size(); ++i) a[i - 1] = (s[i + 1] - 2.0 * s[i] + s[i - 1]) * inv;
  return a;
}

std::vector<double> jerk_of(std::span<const double> s, double dt) {
  if (s.size() < 4) throw DomainError(fmt::format("jerk needs >= 4 samples, got {}", s.size()));
  std::vector<double> j(s.size() - 3);
  const double inv = 1.0 / (dt * dt * dt);
  for (std::size_t i = 1; i + 2 < s.size(); ++i) {
    j[i - 1] = (s[i + 2] - 3.0 * s[i + 1] + 3.0 * s[i] - s[i - 1]) * inv;
  }
  return j;
}

std::vector<double> coarse_interpolant(const planner::CoarsePlan& coarse, const RefinementParams& p) {
  const std::size_t steps = coarse.actions.size();
  const auto k = static_cast<std::size_t>(p.substeps);
  std::vector<double> out(steps * k + 1);
  for (std::size_t j = 0; j < steps; ++j) {
    const planner::PlannerNode& n = coarse.nodes[j];
    out[j * k] = n.s;
    for (std::size_t m = 1; m < k; ++m) {
      const double tau = static_cast<double>(m) * p.dt_fine;
      out[j * k + m] = n.s + n.v * tau + 0.5 * coarse.actions[j] * tau * tau;
    }
  }
  out.back() = coarse.nodes.back().s;
  return out;
}

RefinementProblem::RefinementProblem(const planner::CoarsePlan& coarse, const RefinementParams& p, double v0,
                                     double s0)
    : p_(p), v0_(v0), s0_(s0) {
  p_.validate();
  if (coarse.nodes.size() < 2 || coarse.actions.size() + 1 != coarse.nodes.size()) {
    throw DomainError("coarse plan needs at least one transition");
  }
  const double coarse_dt = coarse.nodes[1].t - coarse.nodes[0].t;
  if (std::abs(coarse_dt - p_.substeps * p_.dt_fine) > 1e-9 * std::max(1.0, coarse.nodes[1].t)) {
    throw DomainError(fmt::format("substeps * dt_fine = {} does not match the plan step {}",
                                  p_.substeps * p_.dt_fine, coarse_dt));
  }
  if (!std::isfinite(v0) || !std::isfinite(s0)) throw DomainError("initial state must be finite");
  t0_ = coarse.nodes.front().t;
  n_ = coarse.actions.size() * static_cast<std::size_t>(p_.substeps) + 1;
  if (n_ < 4) throw DomainError("fine grid needs at least 4 samples");
  for (std::size_t j = 1; j < coarse.nodes.size(); ++j) tracked_.push_back(coarse.nodes[j].s);
}

double RefinementProblem::objective(std::span<const double> s) const {
  const double w1 = p_.w_accel + p_.regularization;
  double total = 0.0;
  for (double a : accel_of(s, p_.dt_fine)) total += w1 * a * a;
  for (double j : jerk_of(s, p_.dt_fine)) total += p_.w_jerk * j * j;
  const auto k = static_cast<std::size_t>(p_.substeps);
  for (std::size_t j = 0; j < tracked_.size(); ++j) {
    const double e = s[(j + 1) * k] - tracked_[j];
    total += p_.w_track * e * e;
  }
  return total;
}

std::vector<double> RefinementProblem::gradient(std::span<const double> s) const {
  const double w1 = p_.w_accel + p_.regularization;
  const double dt = p_.dt_fine;
  std::vector<double> g(n_, 0.0);
  const auto acc = accel_of(s, dt);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double c = 2.0 * w1 * acc[i] / (dt * dt);
    for (std::size_t q = 0; q < 3; ++q) g[i + q] += c * kAccelStencil[q];
  }
  const auto jerk = jerk_of(s, dt);
  for (std::size_t i = 0; i < jerk.size(); ++i) {
    const double c = 2.0 * p_.w_jerk * jerk[i] / (dt * dt * dt);
    for (std::size_t q = 0; q < 4; ++q) g[i + q] += c * kJerkStencil[q];
  }
  const auto k = static_cast<std::size_t>(p_.substeps);
  for (std::size_t j = 0; j < tracked_.size(); ++j) {
    const std::size_t idx = (j + 1) * k;
    g[idx] += 2.0 * p_.w_track * (s[idx] - tracked_[j]);
  }
  return g;
}

std::pair<double, double> RefinementProblem::constraint_residuals(std::span<const double> s) const {
  return {s[0] - s0_, (s[1] - s[0]) / p_.dt_fine - v0_};
}

BandMatrix RefinementProblem::kkt_matrix() const {
  const std::size_t dim = n_ + kOffset;
  BandMatrix K(dim, 3, 3);
  const double w1 = p_.w_accel + p_.regularization;
  const double dt = p_.dt_fine;

  // Hessian of the objective (twice the Gram matrix of the weighted stencils).
  const double ca = 2.0 * w1 / std::pow(dt, 4);
  for (std::size_t i = 0; i + 2 < n_; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        K.at(kOffset + i + a, kOffset + i + b) += ca * kAccelStencil[a] * kAccelStencil[b];
      }
    }
  }
  const double cj = 2.0 * p_.w_jerk / std::pow(dt, 6);
  for (std::size_t i = 0; i + 3 < n_; ++i) {
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        K.at(kOffset + i + a, kOffset + i + b) += cj * kJerkStencil[a] * kJerkStencil[b];
      }
    }
  }
  const auto k = static_cast<std::size_t>(p_.substeps);
  for (std::size_t j = 0; j < tracked_.size(); ++j) {
    const std::size_t idx = kOffset + (j + 1) * k;
    K.at(idx, idx) += 2.0 * p_.w_track;
  }

  // Constraint rows and their transposes:
  //   s0            = s0
  //   (s1 - s0)/dt  = v0
  K.at(0, kOffset) = 1.0;
  K.at(kOffset, 0) = 1.0;
  K.at(1, kOffset) = -1.0 / dt;
  K.at(1, kOffset + 1) = 1.0 / dt;
  K.at(kOffset, 1) = -1.0 / dt;
  K.at(kOffset + 1, 1) = 1.0 / dt;
  return K;
}

std::vector<double> RefinementProblem::kkt_rhs() const {
  std::vector<double> rhs(n_ + kOffset, 0.0);
  rhs[0] = s0_;
  rhs[1] = v0_;
  const auto k = static_cast<std::size_t>(p_.substeps);
  for (std::size_t j = 0; j < tracked_.size(); ++j) rhs[kOffset + (j + 1) * k] = 2.0 * p_.w_track * tracked_[j];
  return rhs;
}

KktSolution RefinementProblem::solve() const {
  // Solve for the deviation from the line s0 + v0 t. The line meets both
  // constraints and has no acceleration or jerk, so the matrix is unchanged
  // while the right-hand side shrinks to the tracking errors; this keeps the
  // round-off independent of how far the vehicle travels.
  std::vector<double> line(n_);
  for (std::size_t i = 0; i < n_; ++i) line[i] = s0_ + v0_ * p_.dt_fine * static_cast<double>(i);
  std::vector<double> rhs(n_ + kOffset, 0.0);
  const auto k = static_cast<std::size_t>(p_.substeps);
  for (std::size_t j = 0; j < tracked_.size(); ++j) {
    const std::size_t idx = (j + 1) * k;
    rhs[kOffset + idx] = 2.0 * p_.w_track * (tracked_[j] - line[idx]);
  }
  std::vector<double> z;
  try {
    const BandMatrix kkt = kkt_matrix();
    const BandLU lu(kkt);
    z = lu.solve(rhs);
    // The smoothing terms make the system stiff (jerk scales with dt^-6);
    // two rounds of iterative refinement recover the digits LU loses.
    for (int round = 0; round < 2; ++round) {
      std::vector<double> r = kkt.multiply(z);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
      const std::vector<double> dz = lu.solve(r);
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += dz[i];
    }
  } catch (const SingularSystemError& e) {
    throw SingularSystemError(fmt::format(
        "refinement system is singular ({}); the acceleration and jerk weights leave untracked samples "
        "undetermined; set a positive regularization to fall back to an acceleration-penalized solve",
        e.what()));
  }
  KktSolution sol;
  sol.multipliers = {z[0], z[1]};
  sol.s_values.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) sol.s_values[i] = line[i] + z[kOffset + i];
  return sol;
}

double RefinementProblem::stationarity_residual(const KktSolution& sol) const {
  std::vector<double> r = gradient(sol.s_values);
  const double inv_dt = 1.0 / p_.dt_fine;
  r[0] += sol.multipliers[0] - sol.multipliers[1] * inv_dt;
  r[1] += sol.multipliers[1] * inv_dt;
  double res = 0.0;
  for (double v : r) res = std::max(res, std::abs(v));

  // Scale: the largest single contribution (tracking pull or multiplier).
  double scale = 1.0;
  const auto k = static_cast<std::size_t>(p_.substeps);
  for (std::size_t j = 0; j < tracked_.size(); ++j) {
    scale = std::max(scale, 2.0 * p_.w_track * std::abs(sol.s_values[(j + 1) * k] - tracked_[j]));
  }
  scale = std::max({scale, std::abs(sol.multipliers[0]), std::abs(sol.multipliers[1]) * inv_dt});
  return res / scale;
}

RefinedTrajectory refine_trajectory(const planner::CoarsePlan& coarse, const RefinementParams& p, double v0,
                                    double s0) {
  const RefinementProblem problem(coarse, p, v0, s0);
  KktSolution sol = problem.solve();
  RefinedTrajectory out;
  out.timestamps.resize(problem.size());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    out.timestamps[i] = problem.t0() + static_cast<double>(i) * p.dt_fine;
  }
  out.accel = accel_of(sol.s_values, p.dt_fine);
  out.jerk = jerk_of(sol.s_values, p.dt_fine);
  out.s_values = std::move(sol.s_values);
  return out;
}

}  // namespace scenesynth::refine
