#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scenesynth/geometry.hpp"
#include "scenesynth/scene.hpp"

namespace scenesynth::analysis {

// Rigid rotation about the first point so the first nonzero displacement
// points along +x. Throws DomainError for fewer than 2 samples or a
// stationary trajectory.
std::vector<Point2> heading_normalize(std::span<const Point2> traj);

struct TrajectoryStats {
  std::vector<double> speeds;    // finite differences over the sample interval
  std::vector<double> headings;  // per-step direction after normalization, (-pi, pi]
  Point2 endpoint;               // final point relative to the first, normalized frame
};

TrajectoryStats trajectory_stats(std::span<const Point2> traj, double dt = kSampleInterval);

// Fixed-width bins over [lo, lo + width * bins). Out-of-range samples are
// clamped into the edge bins so the mass always equals the sample count.
struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::uint64_t> counts;

  Histogram() = default;
  Histogram(double lo, double width, std::size_t bins) : lo(lo), width(width), counts(bins, 0) {}

  void add(double value);
  std::uint64_t total() const;
  double bin_lo(std::size_t i) const { return lo + width * static_cast<double>(i); }
  double bin_hi(std::size_t i) const { return lo + width * static_cast<double>(i + 1); }
  bool same_binning(const Histogram& other) const;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

Histogram speed_distribution(std::span<const Scene> scenes, double bin_width = 0.5, double max_speed = 30.0);
Histogram heading_distribution(std::span<const Scene> scenes, int bins = 72);
std::vector<Point2> endpoint_cloud(std::span<const Scene> scenes);

struct DivergenceReport {
  double overlap = 0.0;  // sum of min(p, q)
  double jsd = 0.0;      // Jensen-Shannon divergence, log base 2
};

// Throws DomainError on mismatched binning or an empty histogram.
DivergenceReport compare_distributions(const Histogram& h1, const Histogram& h2);

inline constexpr double kDefaultMissThreshold = 2.0;

struct ForecastMetrics {
  double min_ade = 0.0;
  double min_fde = 0.0;
  int miss = 0;  // FDE-minimizing mode's final error > threshold
};

ForecastMetrics forecast_metrics(std::span<const std::vector<Point2>> preds, std::span<const Point2> truth,
                                 double miss_threshold = kDefaultMissThreshold);

}  // namespace scenesynth::analysis
