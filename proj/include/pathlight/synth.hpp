#pragma once

#include <cstdint>
#include <vector>

#include "pathlight/gridmap.hpp"
#include "pathlight/mdp.hpp"
#include "pathlight/reward.hpp"
#include "pathlight/trajectory.hpp"

namespace pathlight {

struct DemoConfig {
  int count = 1000;
  int min_length = 10;  // cells moved; shorter samples are redrawn
  int horizon = kDefaultHorizon;
  std::uint64_t seed = 1;
  int max_attempts_per_demo = 1000;
};

/// Demonstrations from the MaxEnt policy of `model`: goal zone uniform over
/// zones, start uniform over free cells. Only samples that reach the goal
/// within the horizon and move at least min_length cells are kept.
std::vector<Trajectory> generate_demos(const GridMap& map, const RewardModel& model, const DemoConfig& config);

}  // namespace pathlight
