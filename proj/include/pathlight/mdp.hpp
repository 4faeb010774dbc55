#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathlight/gridmap.hpp"

namespace pathlight {

using StateId = int;

enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr int kActionCount = 4;
inline constexpr std::array<Action, kActionCount> kActions = {Action::Up, Action::Down, Action::Left, Action::Right};
inline constexpr int kDefaultHorizon = 64;

char action_glyph(Action a);
std::optional<Action> action_from_glyph(char g);

class MdpError : public std::out_of_range {
 public:
  explicit MdpError(const std::string& what) : std::out_of_range(what) {}
};

struct GoalSpec {
  StateId goal = 0;
};

/// Deterministic grid MDP over the passable cells of a map. StateIds are
/// assigned row-major; blocked moves self-loop.
class Mdp {
 public:
  explicit Mdp(const GridMap& map);

  int state_count() const { return static_cast<int>(cells_.size()); }
  Cell cell(StateId s) const;
  std::optional<StateId> state_of(Cell c) const;
  StateId transition(StateId s, Action a) const;
  bool valid(StateId s) const { return s >= 0 && s < state_count(); }

  // Unchecked table access for inner loops.
  const std::array<StateId, kActionCount>& successors(StateId s) const { return table_[static_cast<std::size_t>(s)]; }

  // Action moving s to the 4-adjacent state t, if one exists.
  std::optional<Action> action_between(StateId s, StateId t) const;

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_;
  int height_;
  std::vector<Cell> cells_;
  std::vector<int> state_of_cell_;  // -1 for walls
  std::vector<std::array<StateId, kActionCount>> table_;
};

inline Mdp build_mdp(const GridMap& map) { return Mdp(map); }

}  // namespace pathlight
