#include "pathlight/gridmap.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace pathlight {

namespace {

constexpr char kWall = '#';
constexpr char kDoor = 'D';

std::string at_cell(int row, int col) {
  return " at row " + std::to_string(row) + ", col " + std::to_string(col);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
  });
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct LegendLine {
  char glyph;
  std::string name;
  Cell cell;
  int line;
};

LegendLine parse_legend_line(std::string_view line, int line_no) {
  auto fail = [&](const std::string& why) {
    return MapError(MapError::Kind::Malformed, "legend line " + std::to_string(line_no) + ": " + why, line_no, -1);
  };
  if (line.size() < 3 || line[1] != '=') throw fail("expected GLYPH=name,row,col");
  const std::string_view rest = line.substr(2);
  const std::size_t c1 = rest.find(',');
  const std::size_t c2 = c1 == std::string_view::npos ? c1 : rest.find(',', c1 + 1);
  if (c2 == std::string_view::npos || rest.find(',', c2 + 1) != std::string_view::npos)
    throw fail("expected three comma-separated fields");
  LegendLine out{line[0], std::string(rest.substr(0, c1)), {}, line_no};
  if (!valid_name(out.name)) throw fail("zone name must match [A-Za-z0-9_-]+");
  if (!parse_int(rest.substr(c1 + 1, c2 - c1 - 1), out.cell.row) || !parse_int(rest.substr(c2 + 1), out.cell.col))
    throw fail("row and col must be integers");
  return out;
}

constexpr Cell kNeighbours[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};

}  // namespace

MapError::MapError(Kind kind, const std::string& what, int row, int col)
    : std::runtime_error(what), kind_(kind), row_(row), col_(col) {}

std::optional<int> GridMap::zone_of(Cell c) const {
  const int z = zone_of_[index(c)];
  if (z < 0) return std::nullopt;
  return z;
}

const Zone* GridMap::find_zone(std::string_view name) const {
  for (const Zone& z : zones_)
    if (z.name == name) return &z;
  return nullptr;
}

std::size_t GridMap::passable_count() const {
  return static_cast<std::size_t>(
      std::count_if(classes_.begin(), classes_.end(), [](CellClass k) { return k != CellClass::Wall; }));
}

GridMap parse_map(std::string_view text, double cell_size) {
  using Kind = MapError::Kind;
  const std::vector<std::string_view> lines = split_lines(text);

  std::size_t grid_end = 0;
  while (grid_end < lines.size() && !lines[grid_end].empty()) ++grid_end;
  if (grid_end < 2) throw MapError(Kind::Malformed, "grid needs at least 2 rows", static_cast<int>(grid_end), -1);

  GridMap map;
  map.cell_size_ = cell_size;
  map.height_ = static_cast<int>(grid_end);
  map.width_ = static_cast<int>(lines[0].size());
  if (map.width_ < 2) throw MapError(Kind::Malformed, "grid needs at least 2 columns", 0, map.width_);

  const int h = map.height_;
  const int w = map.width_;
  map.classes_.assign(static_cast<std::size_t>(w) * h, CellClass::Wall);
  map.zone_of_.assign(static_cast<std::size_t>(w) * h, -1);
  std::vector<char> glyphs(static_cast<std::size_t>(w) * h, kWall);

  for (int r = 0; r < h; ++r) {
    const std::string_view row = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != w)
      throw MapError(Kind::Malformed, "ragged row" + at_cell(r, static_cast<int>(row.size())), r,
                     static_cast<int>(row.size()));
    for (int c = 0; c < w; ++c) {
      const char g = row[static_cast<std::size_t>(c)];
      const bool zoned = g >= 'A' && g <= 'Z';
      if (g != kWall && !zoned)
        throw MapError(Kind::Malformed, std::string("unknown glyph '") + g + "'" + at_cell(r, c), r, c);
      const bool border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
      if (g != kWall && border) throw MapError(Kind::Malformed, "open border" + at_cell(r, c), r, c);
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      glyphs[i] = g;
      if (g == kDoor)
        map.classes_[i] = CellClass::Door;
      else if (zoned)
        map.classes_[i] = CellClass::Free;
    }
  }

  // Legend.
  std::map<char, LegendLine> zone_lines;
  std::vector<LegendLine> door_lines;
  for (std::size_t li = grid_end + 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li);
    if (lines[li].empty()) {
      if (li + 1 == lines.size()) break;
      throw MapError(Kind::Malformed, "blank line inside legend", line_no, -1);
    }
    LegendLine entry = parse_legend_line(lines[li], line_no);
    if (entry.glyph == kDoor) {
      door_lines.push_back(std::move(entry));
    } else {
      if (entry.glyph < 'A' || entry.glyph > 'Z')
        throw MapError(Kind::Malformed, "legend glyph must be an uppercase letter", line_no, -1);
      if (zone_lines.count(entry.glyph))
        throw MapError(Kind::Malformed, std::string("duplicate legend glyph '") + entry.glyph + "'", line_no, -1);
      zone_lines.emplace(entry.glyph, std::move(entry));
    }
  }

  // Zone ids follow ascending glyph order so they do not depend on legend order.
  std::map<char, int> glyph_to_zone;
  for (const auto& [glyph, entry] : zone_lines) {
    for (const Zone& z : map.zones_)
      if (z.name == entry.name)
        throw MapError(Kind::Malformed, "duplicate zone name '" + entry.name + "'", entry.line, -1);
    const int id = static_cast<int>(map.zones_.size());
    glyph_to_zone[glyph] = id;
    map.zones_.push_back(Zone{id, glyph, entry.name, entry.cell});
  }

  std::size_t passable = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const char g = glyphs[i];
      if (g == kWall) continue;
      ++passable;
      if (g == kDoor) continue;
      auto it = glyph_to_zone.find(g);
      if (it == glyph_to_zone.end())
        throw MapError(Kind::MissingAnchor, std::string("no legend entry for glyph '") + g + "'" + at_cell(r, c), r, c);
      map.zone_of_[i] = it->second;
    }
  }
  if (passable == 0) throw MapError(Kind::Malformed, "map has no free cells", 0, 0);

  for (const LegendLine& d : door_lines) {
    if (!map.in_bounds(d.cell) || map.cell_class(d.cell) != CellClass::Door)
      throw MapError(Kind::Malformed, "door legend line does not point at a door" + at_cell(d.cell.row, d.cell.col),
                     d.cell.row, d.cell.col);
    const Zone* z = map.find_zone(d.name);
    if (z == nullptr)
      throw MapError(Kind::Malformed, "door assigned to unknown zone '" + d.name + "'", d.line, -1);
    int& slot = map.zone_of_[map.index(d.cell)];
    if (slot >= 0)
      throw MapError(Kind::Malformed, "door listed twice" + at_cell(d.cell.row, d.cell.col), d.cell.row, d.cell.col);
    slot = z->id;
  }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (map.cell_class({r, c}) == CellClass::Door && map.zone_of_[map.index({r, c})] < 0)
        throw MapError(Kind::MissingAnchor, "door has no zone assignment" + at_cell(r, c), r, c);

  for (const Zone& z : map.zones_) {
    const Cell a = z.anchor;
    if (!map.in_bounds(a) || map.cell_class(a) != CellClass::Free || map.zone_of_[map.index(a)] != z.id)
      throw MapError(Kind::MissingAnchor, "anchor of zone '" + z.name + "' is not a Free cell of that zone" +
                                              at_cell(a.row, a.col),
                     a.row, a.col);
  }

  // Connectivity by flood fill from the first passable cell.
  std::vector<char> seen(map.classes_.size(), 0);
  std::deque<Cell> queue;
  for (int i = 0; i < w * h && queue.empty(); ++i) {
    if (map.classes_[static_cast<std::size_t>(i)] != CellClass::Wall) {
      queue.push_back({i / w, i % w});
      seen[static_cast<std::size_t>(i)] = 1;
    }
  }
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    for (const Cell d : kNeighbours) {
      const Cell next{cur.row + d.row, cur.col + d.col};
      if (map.passable(next) && !seen[map.index(next)]) {
        seen[map.index(next)] = 1;
        queue.push_back(next);
      }
    }
  }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (map.passable({r, c}) && !seen[map.index({r, c})])
        throw MapError(Kind::Disconnected, "cell not reachable from the rest of the map" + at_cell(r, c), r, c);

  return map;
}

std::string serialize_map(const GridMap& map) {
  std::string out;
  std::vector<std::pair<Cell, int>> doors;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const Cell cell{r, c};
      switch (map.cell_class(cell)) {
        case CellClass::Wall:
          out += kWall;
          break;
        case CellClass::Door:
          out += kDoor;
          doors.emplace_back(cell, *map.zone_of(cell));
          break;
        case CellClass::Free:
          out += map.zone(*map.zone_of(cell)).glyph;
          break;
      }
    }
    out += '\n';
  }
  out += '\n';
  for (const Zone& z : map.zones()) {
    out += z.glyph;
    out += '=' + z.name + ',' + std::to_string(z.anchor.row) + ',' + std::to_string(z.anchor.col) + '\n';
  }
  for (const auto& [cell, zone] : doors)
    out += std::string("D=") + map.zone(zone).name + ',' + std::to_string(cell.row) + ',' + std::to_string(cell.col) +
           '\n';
  return out;
}

GridMap load_map_file(const std::string& path, double cell_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str(), cell_size);
}

FeatureField::FeatureField(int width, int height, int zone_count, std::vector<double> values,
                           std::vector<std::string> names)
    : width_(width),
      height_(height),
      zone_count_(zone_count),
      dim_(zone_count + 6),
      values_(std::move(values)),
      names_(std::move(names)) {}

FeatureField features(const GridMap& map) {
  const int w = map.width();
  const int h = map.height();
  const int zones = static_cast<int>(map.zones().size());
  const int dim = zones + 6;

  // Multi-source BFS from every wall cell; free cells get their step distance.
  std::vector<int> dist(static_cast<std::size_t>(w) * h, -1);
  std::deque<Cell> queue;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (!map.passable({r, c})) {
        dist[map.index({r, c})] = 0;
        queue.push_back({r, c});
      }
  int max_dist = 1;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    for (const Cell d : kNeighbours) {
      const Cell next{cur.row + d.row, cur.col + d.col};
      if (map.in_bounds(next) && dist[map.index(next)] < 0) {
        dist[map.index(next)] = dist[map.index(cur)] + 1;
        max_dist = std::max(max_dist, dist[map.index(next)]);
        queue.push_back(next);
      }
    }
  }

  std::vector<double> values(static_cast<std::size_t>(w) * h * dim, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Cell cell{r, c};
      double* f = values.data() + map.index(cell) * static_cast<std::size_t>(dim);
      const CellClass k = map.cell_class(cell);
      f[k == CellClass::Free ? 0 : k == CellClass::Wall ? 1 : 2] = 1.0;
      if (k == CellClass::Wall) continue;
      f[FeatureField::kDistanceSlot] = static_cast<double>(dist[map.index(cell)]) / max_dist;
      f[FeatureField::kZoneSlot + *map.zone_of(cell)] = 1.0;
      f[dim - 2] = static_cast<double>(c) / (w - 1);
      f[dim - 1] = static_cast<double>(r) / (h - 1);
    }
  }

  std::vector<std::string> names = {"free", "wall", "door", "dist_wall"};
  for (const Zone& z : map.zones()) names.push_back("zone:" + z.name);
  names.push_back("x");
  names.push_back("y");
  return FeatureField(w, h, zones, std::move(values), std::move(names));
}

std::vector<GoalCandidate> goal_candidates(const GridMap& map) {
  std::vector<GoalCandidate> out;
  out.reserve(map.zones().size());
  for (const Zone& z : map.zones()) out.push_back({z.id, z.anchor});
  return out;
}

}  // namespace pathlight
