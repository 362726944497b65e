#include "scenesynth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"

namespace scenesynth::analysis {
namespace {

std::vector<Point2> positions(const Scene& scene) {
  std::vector<Point2> pts;
  pts.reserve(scene.trajectory.size());
  for (const auto& s : scene.trajectory) pts.push_back(s.pos);
  return pts;
}

// Keeps angles in (-pi, pi].
double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

std::vector<Point2> heading_normalize(std::span<const Point2> traj) {
  if (traj.size() < 2) throw DomainError("heading normalization needs at least 2 samples");
  const Point2 origin = traj.front();
  std::size_t k = 1;
  while (k < traj.size() && traj[k] == origin) ++k;
  if (k == traj.size()) throw DomainError("trajectory is stationary; no initial direction");
  const Point2 d = traj[k] - origin;
  const double angle = std::atan2(d.y, d.x);

  std::vector<Point2> out;
  out.reserve(traj.size());
  out.push_back(origin);
  if (angle == 0.0) {
    out.assign(traj.begin(), traj.end());
    return out;
  }
  for (std::size_t i = 1; i < traj.size(); ++i) out.push_back(origin + rotate(traj[i] - origin, -angle));
  return out;
}

TrajectoryStats trajectory_stats(std::span<const Point2> traj, double dt) {
  TrajectoryStats st;
  const auto norm_traj = heading_normalize(traj);
  for (std::size_t i = 1; i < norm_traj.size(); ++i) {
    const Point2 d = norm_traj[i] - norm_traj[i - 1];
    st.speeds.push_back(norm(d) / dt);
    if (d.x != 0.0 || d.y != 0.0) st.headings.push_back(wrap_angle(std::atan2(d.y, d.x)));
  }
  st.endpoint = norm_traj.back() - norm_traj.front();
  return st;
}

void Histogram::add(double value) {
  if (counts.empty()) throw DomainError("histogram has no bins");
  // The nudge keeps values like 0.99999999999 * width, produced by finite
  // differences of exact speeds, in the bin a human would expect.
  const double pos = std::floor((value - lo) / width + 1e-9);
  std::size_t bin = 0;
  if (pos >= static_cast<double>(counts.size())) {
    bin = counts.size() - 1;
  } else if (pos > 0.0) {
    bin = static_cast<std::size_t>(pos);
  }
  ++counts[bin];
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

bool Histogram::same_binning(const Histogram& other) const {
  return lo == other.lo && width == other.width && counts.size() == other.counts.size();
}

Histogram speed_distribution(std::span<const Scene> scenes, double bin_width, double max_speed) {
  Histogram h(0.0, bin_width, static_cast<std::size_t>(std::llround(max_speed / bin_width)));
  for (const Scene& scene : scenes) {
    const auto& traj = scene.trajectory;
    for (std::size_t i = 1; i < traj.size(); ++i) h.add(distance(traj[i - 1].pos, traj[i].pos) / kSampleInterval);
  }
  return h;
}

Histogram heading_distribution(std::span<const Scene> scenes, int bins) {
  constexpr double kPi = std::numbers::pi;
  Histogram h(-kPi, 2.0 * kPi / bins, static_cast<std::size_t>(bins));
  for (const Scene& scene : scenes) {
    const auto pts = positions(scene);
    try {
      for (double a : trajectory_stats(pts).headings) h.add(a);
    } catch (const DomainError&) {
      // Stationary trajectories carry no direction.
    }
  }
  return h;
}

std::vector<Point2> endpoint_cloud(std::span<const Scene> scenes) {
  std::vector<Point2> cloud;
  for (const Scene& scene : scenes) {
    try {
      cloud.push_back(trajectory_stats(positions(scene)).endpoint);
    } catch (const DomainError&) {
    }
  }
  return cloud;
}

DivergenceReport compare_distributions(const Histogram& h1, const Histogram& h2) {
  if (!h1.same_binning(h2)) throw DomainError("histograms use different binning");
  const double n1 = static_cast<double>(h1.total());
  const double n2 = static_cast<double>(h2.total());
  if (n1 == 0.0 || n2 == 0.0) throw DomainError("cannot compare an empty histogram");

  DivergenceReport r;
  double kl_pm = 0.0;
  double kl_qm = 0.0;
  for (std::size_t i = 0; i < h1.counts.size(); ++i) {
    const double p = static_cast<double>(h1.counts[i]) / n1;
    const double q = static_cast<double>(h2.counts[i]) / n2;
    r.overlap += std::min(p, q);
    const double m = 0.5 * (p + q);
    if (p > 0.0) kl_pm += p * std::log2(p / m);
    if (q > 0.0) kl_qm += q * std::log2(q / m);
  }
  // Sorting the two halves keeps the floating-point sum symmetric in (h1, h2).
  r.jsd = 0.5 * std::min(kl_pm, kl_qm) + 0.5 * std::max(kl_pm, kl_qm);
  r.jsd = std::clamp(r.jsd, 0.0, 1.0);
  r.overlap = std::clamp(r.overlap, 0.0, 1.0);
  return r;
}

ForecastMetrics forecast_metrics(std::span<const std::vector<Point2>> preds, std::span<const Point2> truth,
                                 double miss_threshold) {
  if (preds.size() != 6) throw DomainError(fmt::format("expected 6 candidate trajectories, got {}", preds.size()));
  if (truth.empty()) throw DomainError("ground-truth trajectory is empty");
  ForecastMetrics out;
  out.min_ade = std::numeric_limits<double>::infinity();
  out.min_fde = std::numeric_limits<double>::infinity();
  for (const auto& mode : preds) {
    if (mode.size() != truth.size()) throw DomainError("candidate and ground-truth horizons differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += distance(mode[i], truth[i]);
    out.min_ade = std::min(out.min_ade, sum / static_cast<double>(truth.size()));
    out.min_fde = std::min(out.min_fde, distance(mode.back(), truth.back()));
  }
  out.miss = out.min_fde > miss_threshold ? 1 : 0;
  return out;
}

}  // namespace scenesynth::analysis
