#include "scenesynth/plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"
#include "scenesynth/text_util.hpp"

namespace scenesynth::plot {
namespace {

constexpr const char* kHistogramHeader = "bin_lo,bin_hi,count";
constexpr const char* kCloudHeader = "x,y";

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  return in;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Reads the header line and then hands each nonblank row, split on commas,
// to `row`.
template <typename Fn>
void read_table(std::istream& in, const std::string& source, const char* header, std::size_t columns, Fn row) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  ++lineno;
  if (trim(line) != header) throw ParseError(source, lineno, fmt::format("expected header '{}'", header));
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != columns) {
      throw ParseError(source, lineno, fmt::format("expected {} fields, got {}", columns, fields.size()));
    }
    row(fields, lineno);
  }
}

}  // namespace

void write_histogram_csv(std::ostream& out, const analysis::Histogram& h) {
  out << kHistogramHeader << '\n';
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << fmt::format("{},{},{}\n", h.bin_lo(i), h.bin_hi(i), h.counts[i]);
  }
}

void save_histogram_csv(const std::string& path, const analysis::Histogram& h) {
  std::ostringstream ss;
  write_histogram_csv(ss, h);
  write_file_atomic(path, ss.str());
}

analysis::Histogram parse_histogram_csv(std::istream& in, const std::string& source) {
  analysis::Histogram h;
  h.counts.clear();
  read_table(in, source, kHistogramHeader, 3, [&](const std::vector<std::string>& f, std::size_t lineno) {
    const auto lo = parse_double(f[0]);
    const auto hi = parse_double(f[1]);
    const auto count = parse_uint(f[2]);
    if (!lo || !hi || !count) throw ParseError(source, lineno, "malformed histogram row");
    if (h.counts.empty()) {
      h.lo = *lo;
      h.width = *hi - *lo;
      if (!(h.width > 0.0)) throw ParseError(source, lineno, "bin_hi must exceed bin_lo");
    }
    h.counts.push_back(*count);
  });
  return h;
}

analysis::Histogram read_histogram_csv(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_histogram_csv(in, path);
}

void write_cloud_csv(std::ostream& out, std::span<const Point2> cloud) {
  out << kCloudHeader << '\n';
  for (const Point2& p : cloud) out << fmt::format("{},{}\n", p.x, p.y);
}

void save_cloud_csv(const std::string& path, std::span<const Point2> cloud) {
  std::ostringstream ss;
  write_cloud_csv(ss, cloud);
  write_file_atomic(path, ss.str());
}

std::vector<Point2> parse_cloud_csv(std::istream& in, const std::string& source) {
  std::vector<Point2> cloud;
  read_table(in, source, kCloudHeader, 2, [&](const std::vector<std::string>& f, std::size_t lineno) {
    const auto x = parse_double(f[0]);
    const auto y = parse_double(f[1]);
    if (!x || !y) throw ParseError(source, lineno, "malformed point row");
    cloud.push_back({*x, *y});
  });
  return cloud;
}

std::vector<Point2> read_cloud_csv(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_cloud_csv(in, path);
}

std::string render_histogram_svg(const analysis::Histogram& h, const std::string& title) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 360.0;
  constexpr double kMargin = 40.0;
  const double plot_w = kWidth - 2.0 * kMargin;
  const double plot_h = kHeight - 2.0 * kMargin;

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "  <title>{2}</title>\n"
      "  <rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "  <text x=\"{3}\" y=\"{4}\" font-family=\"sans-serif\" font-size=\"14\">{2}</text>\n",
      kWidth, kHeight, xml_escape(title), kMargin, kMargin * 0.6);

  const std::uint64_t peak = h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
  if (peak > 0) {
    const double bar_w = plot_w / static_cast<double>(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (h.counts[i] == 0) continue;
      const double bh = plot_h * static_cast<double>(h.counts[i]) / static_cast<double>(peak);
      svg += fmt::format(
          "  <rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"steelblue\">"
          "<title>[{}, {}): {}</title></rect>\n",
          kMargin + bar_w * static_cast<double>(i), kMargin + plot_h - bh, bar_w, bh, h.bin_lo(i), h.bin_hi(i),
          h.counts[i]);
    }
  }
  // Axes and range labels.
  svg += fmt::format(
      "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "  <line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\" stroke=\"black\"/>\n",
      kMargin, kMargin + plot_h, kMargin + plot_w, kMargin);
  if (!h.counts.empty()) {
    svg += fmt::format(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.3g}</text>\n"
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.3g}</text>\n",
        kMargin, kHeight - kMargin * 0.4, h.bin_lo(0), kMargin + plot_w, kHeight - kMargin * 0.4,
        h.bin_hi(h.counts.size() - 1));
  }
  svg += "</svg>\n";
  return svg;
}

void save_histogram_svg(const std::string& path, const analysis::Histogram& h, const std::string& title) {
  write_file_atomic(path, render_histogram_svg(h, title));
}

}  // namespace scenesynth::plot
