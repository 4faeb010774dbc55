#pragma once

#include <compare>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pathlight {

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class CellClass { Free, Wall, Door };

struct Zone {
  int id = 0;
  char glyph = 'A';
  std::string name;
  Cell anchor;  // interior Free cell; the zone's canonical goal state
};

class MapError : public std::runtime_error {
 public:
  enum class Kind { Malformed, Disconnected, MissingAnchor };

  MapError(Kind kind, const std::string& what, int row, int col);

  Kind kind() const { return kind_; }
  // Grid coordinates of the offending cell. For legend problems row is the
  // 0-indexed line of the file and col is -1.
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  Kind kind_;
  int row_;
  int col_;
};

/// House floor plan as a typed cell grid. Immutable once parsed.
///
/// Every border cell is a wall, every Free/Door cell belongs to exactly one
/// zone, and the Free/Door cells form one 4-connected component.
class GridMap {
 public:
  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }
  CellClass cell_class(Cell c) const { return classes_[index(c)]; }
  bool passable(Cell c) const { return in_bounds(c) && cell_class(c) != CellClass::Wall; }

  // Zone id of a Free/Door cell; nullopt for walls.
  std::optional<int> zone_of(Cell c) const;

  const std::vector<Zone>& zones() const { return zones_; }  // ascending id
  const Zone& zone(int id) const { return zones_.at(static_cast<std::size_t>(id)); }
  const Zone* find_zone(std::string_view name) const;

  std::size_t passable_count() const;

  friend GridMap parse_map(std::string_view text, double cell_size);
  friend std::string serialize_map(const GridMap& map);

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.5;
  std::vector<CellClass> classes_;
  std::vector<int> zone_of_;  // -1 on walls
  std::vector<Zone> zones_;
};

inline constexpr double kDefaultCellSize = 0.5;

/// Parses a map file: grid block, blank line, legend lines
/// `GLYPH=name,row,col`. For zone glyphs the coordinate is the anchor; for `D`
/// lines it is the door cell being assigned to zone `name`.
GridMap parse_map(std::string_view text, double cell_size = kDefaultCellSize);

/// Canonical text form: zone legend lines in glyph order, then door lines in
/// row-major order, trailing newline.
std::string serialize_map(const GridMap& map);

GridMap load_map_file(const std::string& path, double cell_size = kDefaultCellSize);

/// Per-cell descriptors consumed by the reward model. Layout per cell:
/// [free, wall, door, dist_wall, zone one-hot (Z, ascending id), x, y].
class FeatureField {
 public:
  FeatureField(int width, int height, int zone_count, std::vector<double> values, std::vector<std::string> names);

  int dim() const { return dim_; }
  int zone_count() const { return zone_count_; }
  std::span<const double> at(std::size_t cell_index) const {
    return {values_.data() + cell_index * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> at(Cell c) const { return at(static_cast<std::size_t>(c.row) * width_ + c.col); }
  const std::vector<std::string>& names() const { return names_; }

  static constexpr int kDistanceSlot = 3;
  static constexpr int kZoneSlot = 4;

 private:
  int width_;
  int height_;
  int zone_count_;
  int dim_;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

FeatureField features(const GridMap& map);

struct GoalCandidate {
  int zone_id;
  Cell anchor;
};

std::vector<GoalCandidate> goal_candidates(const GridMap& map);

}  // namespace pathlight
