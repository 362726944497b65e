#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "scenesynth/errors.hpp"
#include "scenesynth/map.hpp"
#include "scenesynth/text_util.hpp"

namespace scenesynth {
namespace {

struct PendingLane {
  std::string id;
  std::size_t line = 0;
  std::vector<Point2> points;
  std::vector<std::string> preds;
  std::vector<std::string> succs;
};

}  // namespace

SceneMap parse_map(std::istream& in, const std::string& source) {
  SceneMap map;
  std::vector<PendingLane> pending;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = split_ws(strip_comment(raw));
    if (tokens.empty()) continue;
    const std::string& key = tokens[0];

    auto expect_args = [&](std::size_t n) {
      if (tokens.size() != n + 1) {
        throw ParseError(source, line_no,
                         fmt::format("'{}' expects {} argument(s), got {}", key, n, tokens.size() - 1));
      }
    };
    auto current = [&]() -> PendingLane& {
      if (pending.empty()) throw ParseError(source, line_no, fmt::format("'{}' before any lane header", key));
      return pending.back();
    };

    if (key == "city") {
      expect_args(1);
      map.city_tag = tokens[1];
    } else if (key == "lane") {
      expect_args(1);
      pending.push_back(PendingLane{tokens[1], line_no, {}, {}, {}});
    } else if (key == "pt") {
      expect_args(2);
      const auto x = parse_double(tokens[1]);
      const auto y = parse_double(tokens[2]);
      if (!x || !y) throw ParseError(source, line_no, fmt::format("bad coordinate in '{}'", raw));
      current().points.push_back({*x, *y});
    } else if (key == "succ") {
      expect_args(1);
      current().succs.push_back(tokens[1]);
    } else if (key == "pred") {
      expect_args(1);
      current().preds.push_back(tokens[1]);
    } else {
      throw ParseError(source, line_no, fmt::format("unknown record '{}'", key));
    }
  }

  for (auto& lane : pending) {
    try {
      map.add_lane(LaneSegment{lane.id, Polyline(std::move(lane.points)), std::move(lane.preds),
                               std::move(lane.succs)});
    } catch (const ValidationError& e) {
      throw ParseError(source, lane.line, fmt::format("lane '{}': {}", lane.id, e.what()));
    }
  }
  validate_map(map);
  return map;
}

SceneMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open map file '{}'", path));
  return parse_map(in, path);
}

void write_map(std::ostream& out, const SceneMap& map) {
  if (!map.city_tag.empty()) out << "city " << map.city_tag << '\n';
  for (const auto& [id, lane] : map.lanes) {
    out << "lane " << id << '\n';
    // Shortest round-trip representation: reloading reproduces the bits.
    for (const Point2& p : lane.centerline.points()) out << fmt::format("pt {} {}\n", p.x, p.y);
    for (const auto& s : lane.successors) out << "succ " << s << '\n';
    for (const auto& p : lane.predecessors) out << "pred " << p << '\n';
  }
}

void save_map(const std::string& path, const SceneMap& map) {
  std::ostringstream buf;
  write_map(buf, map);
  write_file_atomic(path, buf.str());
}

}  // namespace scenesynth
