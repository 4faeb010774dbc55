#pragma once

#include <map>
#include <span>
#include <vector>

#include "pathlight/mdp.hpp"

namespace pathlight {

struct EnumeratedPath {
  std::vector<Action> actions;  // distinct absorbed action prefix
  std::vector<StateId> states;  // s_init .. goal
  double weight = 0.0;          // exp(sum of r over states before the goal)
  double probability = 0.0;     // weight / Z
};

struct PathDistribution {
  std::vector<EnumeratedPath> paths;
  double partition = 0.0;  // Z
  // Probability per distinct state sequence (action prefixes that revisit
  // the same cells through different self-loops are merged).
  std::map<std::vector<StateId>, double> state_paths;
};

/// Exhaustive path distribution for tiny instances: every action sequence of
/// length `horizon` from s_init, cut at the first goal arrival. Each distinct
/// absorbed prefix carries weight exp(sum_{i<arrival} r(s_i)); sequences that
/// never reach the goal carry no mass. Rewards are used as given (no sign
/// check) so the oracle also accepts r = 0.
PathDistribution enumerate_paths(std::span<const double> reward, StateId s_init, GoalSpec goal, int horizon,
                                 const Mdp& mdp);

inline constexpr double kMaxEnumeratedSequences = 1e7;

}  // namespace pathlight
