#pragma once

#include <span>
#include <vector>

#include "pathlight/mdp.hpp"
#include "pathlight/reward.hpp"

namespace pathlight {

/// Non-stationary stochastic policy pi^(n)(a|s) for steps n = 1..N, planned
/// toward a single goal. Rows whose log partition is -inf (the goal cannot be
/// reached in the remaining steps) are uniform and flagged unreachable.
class Policy {
 public:
  Policy(int horizon, int state_count, StateId goal);

  // Uniform action choice everywhere and no goal conditioning; used as the
  // random-walk baseline.
  static Policy uniform(int horizon, int state_count);

  int horizon() const { return horizon_; }
  int state_count() const { return states_; }
  // -1 for the uniform baseline.
  StateId goal() const { return goal_; }

  double prob(int n, StateId s, Action a) const { return probs_[row(n, s) * kActionCount + static_cast<int>(a)]; }
  std::span<const double> row_probs(int n, StateId s) const {
    return {probs_.data() + row(n, s) * kActionCount, static_cast<std::size_t>(kActionCount)};
  }
  bool reachable(int n, StateId s) const { return reachable_[row(n, s)] != 0; }

  // Log partition V^(n)(s) for n = 0..N, with V^(n)(goal) = 0.
  double value(int n, StateId s) const {
    return values_[static_cast<std::size_t>(n) * states_ + static_cast<std::size_t>(s)];
  }

 private:
  friend Policy value_iteration(std::span<const double>, GoalSpec, int, const Mdp&);

  std::size_t row(int n, StateId s) const {
    return static_cast<std::size_t>(n - 1) * states_ + static_cast<std::size_t>(s);
  }

  int horizon_;
  int states_;
  StateId goal_;
  std::vector<double> probs_;     // (n-1, s, a)
  std::vector<char> reachable_;   // (n-1, s)
  std::vector<double> values_;    // (n, s), n = 0..N
};

/// Goal-conditioned approximate value iteration. Backward over n = N..1 with
/// V^(n)(goal) held at 0, Q^(n)(s,a) = r(s) + V^(n)(T(s,a)),
/// V^(n-1)(s) = logsumexp_a Q^(n)(s,a), pi^(n)(a|s) = exp(Q^(n)(s,a) - V^(n-1)(s)).
/// -inf is carried as a true infinity.
Policy value_iteration(std::span<const double> reward, GoalSpec goal, int horizon, const Mdp& mdp);

/// Per-step state visitation D^(n)(s) for n = 1..N+1 with the goal entry of
/// every step zeroed (absorbed), and cumulative D(s) = sum_{n<=N} D^(n)(s).
struct Svf {
  int horizon = 0;
  int state_count = 0;
  std::vector<double> per_step;    // (n-1, s), n = 1..N+1
  std::vector<double> cumulative;  // s
  std::vector<double> absorbed;    // mass removed at the goal on step n = 1..N+1

  double at(int n, StateId s) const {
    return per_step[static_cast<std::size_t>(n - 1) * state_count + static_cast<std::size_t>(s)];
  }
  double step_mass(int n) const;
  double total_absorbed() const;
};

/// Pushes a point mass at s_init forward through the policy, absorbing at the
/// goal.
Svf policy_propagation(const Policy& policy, StateId s_init, GoalSpec goal, int horizon, const Mdp& mdp);

/// Same recursion from an arbitrary nonnegative initial distribution. By
/// linearity this equals the weighted sum of point-mass propagations.
Svf propagate_distribution(const Policy& policy, std::span<const double> initial, GoalSpec goal, int horizon,
                           const Mdp& mdp);

/// Sum of log pi^(n)(a_n|s_n) for the given action sequence from s_init,
/// stopping at the first arrival at the policy's goal. Returns -inf when a
/// step has zero probability or sits on an unreachable row.
double action_sequence_log_prob(const Policy& policy, const Mdp& mdp, StateId s_init, std::span<const Action> actions);

double log_sum_exp(std::span<const double> values);

}  // namespace pathlight
