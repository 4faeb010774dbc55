#include "pathlight/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pathlight {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_reward(std::span<const double> reward, const Mdp& mdp) {
  if (reward.size() != static_cast<std::size_t>(mdp.state_count()))
    throw IrlError(IrlError::Kind::DimensionMismatch, "reward vector has " + std::to_string(reward.size()) +
                                                          " entries for " + std::to_string(mdp.state_count()) +
                                                          " states");
  for (std::size_t s = 0; s < reward.size(); ++s)
    if (!(reward[s] <= 0.0) || !std::isfinite(reward[s]))
      throw IrlError(IrlError::Kind::NonpositiveRewardViolated,
                     "reward at state " + std::to_string(s) + " is not a finite nonpositive value");
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

Policy::Policy(int horizon, int state_count, StateId goal)
    : horizon_(horizon),
      states_(state_count),
      goal_(goal),
      probs_(static_cast<std::size_t>(horizon) * state_count * kActionCount, 1.0 / kActionCount),
      reachable_(static_cast<std::size_t>(horizon) * state_count, 0),
      values_(static_cast<std::size_t>(horizon + 1) * state_count, kNegInf) {}

Policy Policy::uniform(int horizon, int state_count) {
  Policy p(horizon, state_count, -1);
  std::fill(p.reachable_.begin(), p.reachable_.end(), 1);
  std::fill(p.values_.begin(), p.values_.end(), 0.0);
  return p;
}

Policy value_iteration(std::span<const double> reward, GoalSpec goal, int horizon, const Mdp& mdp) {
  if (horizon < 1) throw IrlError(IrlError::Kind::InvalidConfig, "horizon must be at least 1");
  if (!mdp.valid(goal.goal)) throw MdpError("invalid goal state " + std::to_string(goal.goal));
  check_reward(reward, mdp);

  const int S = mdp.state_count();
  Policy policy(horizon, S, goal.goal);
  std::vector<double> v_next(static_cast<std::size_t>(S), kNegInf);
  std::vector<double> v_cur(static_cast<std::size_t>(S));
  std::array<double, kActionCount> q{};

  for (int n = horizon; n >= 1; --n) {
    v_next[static_cast<std::size_t>(goal.goal)] = 0.0;
    std::copy(v_next.begin(), v_next.end(), policy.values_.begin() + static_cast<std::ptrdiff_t>(n) * S);
    for (StateId s = 0; s < S; ++s) {
      const auto& succ = mdp.successors(s);
      const double r = reward[static_cast<std::size_t>(s)];
      for (int a = 0; a < kActionCount; ++a) q[a] = r + v_next[static_cast<std::size_t>(succ[a])];
      const double v = log_sum_exp(q);
      v_cur[static_cast<std::size_t>(s)] = v;
      if (v == kNegInf) continue;  // row stays uniform and unflagged
      const std::size_t row = policy.row(n, s);
      policy.reachable_[row] = 1;
      for (int a = 0; a < kActionCount; ++a) policy.probs_[row * kActionCount + a] = std::exp(q[a] - v);
    }
    std::swap(v_next, v_cur);
  }
  v_next[static_cast<std::size_t>(goal.goal)] = 0.0;
  std::copy(v_next.begin(), v_next.end(), policy.values_.begin());
  return policy;
}

double Svf::step_mass(int n) const {
  const auto begin = per_step.begin() + static_cast<std::ptrdiff_t>(n - 1) * state_count;
  return std::accumulate(begin, begin + state_count, 0.0);
}

double Svf::total_absorbed() const { return std::accumulate(absorbed.begin(), absorbed.end(), 0.0); }

Svf propagate_distribution(const Policy& policy, std::span<const double> initial, GoalSpec goal, int horizon,
                           const Mdp& mdp) {
  if (policy.horizon() != horizon)
    throw IrlError(IrlError::Kind::HorizonMismatch, "policy horizon " + std::to_string(policy.horizon()) +
                                                        " differs from requested horizon " + std::to_string(horizon));
  if (policy.goal() >= 0 && policy.goal() != goal.goal)
    throw IrlError(IrlError::Kind::InvalidConfig, "policy was planned for a different goal");
  if (!mdp.valid(goal.goal)) throw MdpError("invalid goal state " + std::to_string(goal.goal));
  const int S = mdp.state_count();
  if (initial.size() != static_cast<std::size_t>(S))
    throw IrlError(IrlError::Kind::DimensionMismatch, "initial distribution size does not match state count");

  Svf svf;
  svf.horizon = horizon;
  svf.state_count = S;
  svf.per_step.assign(static_cast<std::size_t>(horizon + 1) * S, 0.0);
  svf.cumulative.assign(static_cast<std::size_t>(S), 0.0);
  svf.absorbed.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  std::copy(initial.begin(), initial.end(), svf.per_step.begin());

  const auto g = static_cast<std::size_t>(goal.goal);
  for (int n = 1; n <= horizon; ++n) {
    double* cur = svf.per_step.data() + static_cast<std::size_t>(n - 1) * S;
    double* next = cur + S;
    svf.absorbed[static_cast<std::size_t>(n - 1)] = cur[g];
    cur[g] = 0.0;
    for (StateId s = 0; s < S; ++s) {
      const double mass = cur[s];
      if (mass == 0.0) continue;
      if (!policy.reachable(n, s))
        throw IrlError(IrlError::Kind::UnreachableStart,
                       "visitation mass on state " + std::to_string(s) + " which cannot reach the goal by step " +
                           std::to_string(horizon + 1));
      const auto& succ = mdp.successors(s);
      const auto probs = policy.row_probs(n, s);
      for (int a = 0; a < kActionCount; ++a) next[succ[a]] += probs[static_cast<std::size_t>(a)] * mass;
      svf.cumulative[static_cast<std::size_t>(s)] += mass;
    }
  }
  double* last = svf.per_step.data() + static_cast<std::size_t>(horizon) * S;
  svf.absorbed[static_cast<std::size_t>(horizon)] = last[g];
  last[g] = 0.0;
  return svf;
}

Svf policy_propagation(const Policy& policy, StateId s_init, GoalSpec goal, int horizon, const Mdp& mdp) {
  if (!mdp.valid(s_init)) throw MdpError("invalid start state " + std::to_string(s_init));
  std::vector<double> initial(static_cast<std::size_t>(mdp.state_count()), 0.0);
  initial[static_cast<std::size_t>(s_init)] = 1.0;
  return propagate_distribution(policy, initial, goal, horizon, mdp);
}

double action_sequence_log_prob(const Policy& policy, const Mdp& mdp, StateId s_init,
                                std::span<const Action> actions) {
  double acc = 0.0;
  StateId s = s_init;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (s == policy.goal()) break;
    const int n = static_cast<int>(i) + 1;
    if (n > policy.horizon() || !policy.reachable(n, s)) return kNegInf;
    const double p = policy.prob(n, s, actions[i]);
    if (p <= 0.0) return kNegInf;
    acc += std::log(p);
    s = mdp.transition(s, actions[i]);
  }
  return acc;
}

}  // namespace pathlight
