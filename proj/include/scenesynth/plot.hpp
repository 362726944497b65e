#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scenesynth/analysis.hpp"

namespace scenesynth::plot {

// `bin_lo,bin_hi,count` rows. A histogram without bins writes only the header.
void write_histogram_csv(std::ostream& out, const analysis::Histogram& h);
void save_histogram_csv(const std::string& path, const analysis::Histogram& h);
analysis::Histogram parse_histogram_csv(std::istream& in, const std::string& source = "<histogram>");
analysis::Histogram read_histogram_csv(const std::string& path);

// `x,y` rows.
void write_cloud_csv(std::ostream& out, std::span<const Point2> cloud);
void save_cloud_csv(const std::string& path, std::span<const Point2> cloud);
std::vector<Point2> parse_cloud_csv(std::istream& in, const std::string& source = "<cloud>");
std::vector<Point2> read_cloud_csv(const std::string& path);

// Bar chart as a standalone SVG document. Bars are normalized to the tallest bin.
std::string render_histogram_svg(const analysis::Histogram& h, const std::string& title);
void save_histogram_svg(const std::string& path, const analysis::Histogram& h, const std::string& title);

}  // namespace scenesynth::plot
