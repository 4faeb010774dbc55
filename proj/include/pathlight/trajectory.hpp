#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathlight/mdp.hpp"
#include "pathlight/reward.hpp"

namespace pathlight {

/// A demonstrated or sampled path: states s_1..s_{m+1} and actions a_1..a_m
/// with s_{i+1} = T(s_i, a_i). A zero-length trajectory has one state.
struct Trajectory {
  int id = 0;
  std::optional<int> goal_zone;
  std::vector<StateId> states;
  std::vector<Action> actions;

  std::size_t length() const { return actions.size(); }
  StateId start() const { return states.front(); }
  StateId last() const { return states.back(); }
  bool operator==(const Trajectory&) const = default;
};

// Builds a trajectory from a start state and an action sequence.
Trajectory make_trajectory(const Mdp& mdp, StateId start, const std::vector<Action>& actions);

// Throws IrlError(InconsistentTrajectory) unless states and actions agree with T.
void check_trajectory(const Trajectory& traj, const Mdp& mdp);

// Number of leading actions taken before the first arrival at `goal`.
std::size_t steps_before_arrival(const Trajectory& traj, StateId goal);

/// Trajectory file: one record per line,
///
///   id,goal_zone,(row,col,A),(row,col,A),...,(row,col,.)
///
/// goal_zone is a zone id or `-`; A is one of U D L R; the final triple
/// carries `.` since no action is taken from the last state. Every line ends
/// with `\n`; an empty file holds zero trajectories.
std::string format_trajectories(const std::vector<Trajectory>& trajs, const Mdp& mdp);
std::vector<Trajectory> parse_trajectories(std::string_view text, const Mdp& mdp);

}  // namespace pathlight
