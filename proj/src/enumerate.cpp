#include "pathlight/enumerate.hpp"

#include <cmath>

#include "pathlight/reward.hpp"

namespace pathlight {

namespace {

struct Walker {
  std::span<const double> reward;
  StateId goal;
  int horizon;
  const Mdp& mdp;
  std::vector<Action> actions;
  std::vector<StateId> states;
  std::vector<EnumeratedPath>* out;

  void walk(double accumulated) {
    const StateId s = states.back();
    if (s == goal) {
      out->push_back({actions, states, std::exp(accumulated), 0.0});
      return;
    }
    if (static_cast<int>(actions.size()) == horizon) return;
    const double r = reward[static_cast<std::size_t>(s)];
    for (Action a : kActions) {
      actions.push_back(a);
      states.push_back(mdp.transition(s, a));
      walk(accumulated + r);
      states.pop_back();
      actions.pop_back();
    }
  }
};

}  // namespace

PathDistribution enumerate_paths(std::span<const double> reward, StateId s_init, GoalSpec goal, int horizon,
                                 const Mdp& mdp) {
  if (horizon < 0 || std::pow(static_cast<double>(kActionCount), horizon) > kMaxEnumeratedSequences)
    throw IrlError(IrlError::Kind::InstanceTooLarge,
                   "4^" + std::to_string(horizon) + " action sequences exceed the enumeration limit");
  if (!mdp.valid(s_init) || !mdp.valid(goal.goal)) throw MdpError("invalid start or goal state");
  if (reward.size() != static_cast<std::size_t>(mdp.state_count()))
    throw IrlError(IrlError::Kind::DimensionMismatch, "reward vector size does not match state count");

  PathDistribution dist;
  Walker walker{reward, goal.goal, horizon, mdp, {}, {s_init}, &dist.paths};
  walker.walk(0.0);
  for (const EnumeratedPath& p : dist.paths) dist.partition += p.weight;
  if (dist.partition > 0.0)
    for (EnumeratedPath& p : dist.paths) {
      p.probability = p.weight / dist.partition;
      dist.state_paths[p.states] += p.probability;
    }
  return dist;
}

}  // namespace pathlight
