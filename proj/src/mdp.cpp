#include "pathlight/mdp.hpp"

namespace pathlight {

char action_glyph(Action a) {
  switch (a) {
    case Action::Up:
      return 'U';
    case Action::Down:
      return 'D';
    case Action::Left:
      return 'L';
    case Action::Right:
      return 'R';
  }
  return '?';
}

std::optional<Action> action_from_glyph(char g) {
  switch (g) {
    case 'U':
      return Action::Up;
    case 'D':
      return Action::Down;
    case 'L':
      return Action::Left;
    case 'R':
      return Action::Right;
    default:
      return std::nullopt;
  }
}

Mdp::Mdp(const GridMap& map) : width_(map.width()), height_(map.height()) {
  state_of_cell_.assign(static_cast<std::size_t>(width_) * height_, -1);
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      if (map.passable({r, c})) {
        state_of_cell_[map.index({r, c})] = static_cast<int>(cells_.size());
        cells_.push_back({r, c});
      }

  constexpr Cell kDelta[kActionCount] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  table_.resize(cells_.size());
  for (std::size_t s = 0; s < cells_.size(); ++s) {
    for (int a = 0; a < kActionCount; ++a) {
      const Cell next{cells_[s].row + kDelta[a].row, cells_[s].col + kDelta[a].col};
      table_[s][static_cast<std::size_t>(a)] =
          map.passable(next) ? state_of_cell_[map.index(next)] : static_cast<StateId>(s);
    }
  }
}

Cell Mdp::cell(StateId s) const {
  if (!valid(s)) throw MdpError("invalid state id " + std::to_string(s));
  return cells_[static_cast<std::size_t>(s)];
}

std::optional<StateId> Mdp::state_of(Cell c) const {
  if (c.row < 0 || c.row >= height_ || c.col < 0 || c.col >= width_) return std::nullopt;
  const int s = state_of_cell_[static_cast<std::size_t>(c.row) * width_ + c.col];
  if (s < 0) return std::nullopt;
  return s;
}

StateId Mdp::transition(StateId s, Action a) const {
  if (!valid(s)) throw MdpError("invalid state id " + std::to_string(s));
  return table_[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
}

std::optional<Action> Mdp::action_between(StateId s, StateId t) const {
  if (!valid(s) || !valid(t) || s == t) return std::nullopt;
  for (Action a : kActions)
    if (table_[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] == t) return a;
  return std::nullopt;
}

}  // namespace pathlight
