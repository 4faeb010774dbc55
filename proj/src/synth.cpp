#include "pathlight/synth.hpp"

#include <stdexcept>

#include "pathlight/forecast.hpp"
#include "pathlight/random.hpp"

namespace pathlight {

std::vector<Trajectory> generate_demos(const GridMap& map, const RewardModel& model, const DemoConfig& config) {
  if (config.count < 0 || config.min_length < 0 || config.horizon < 1)
    throw std::invalid_argument("demo count, minimum length and horizon must be nonnegative");
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  const std::vector<double> r = reward_field(model, sf);
  const GoalPolicies policies(map, mdp, r, config.horizon);

  Rng rng(config.seed);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(config.count));
  for (int i = 0; i < config.count; ++i) {
    bool done = false;
    for (int attempt = 0; attempt < config.max_attempts_per_demo && !done; ++attempt) {
      const std::size_t g = static_cast<std::size_t>(rng.index(policies.size()));
      const StateId start = static_cast<StateId>(rng.index(static_cast<std::uint64_t>(mdp.state_count())));
      const StateId goal = policies.goal_state(g);
      Trajectory t = sample_paths(policies.policy(g), start, GoalSpec{goal}, 1, rng.index(UINT64_MAX), mdp).front();
      if (t.last() != goal || t.length() < static_cast<std::size_t>(config.min_length)) continue;
      t.id = i;
      t.goal_zone = policies.candidate(g).zone_id;
      out.push_back(std::move(t));
      done = true;
    }
    if (!done) throw std::runtime_error("could not draw demo " + std::to_string(i) + " within the attempt limit");
  }
  return out;
}

}  // namespace pathlight
