#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pathlight/gridmap.hpp"
#include "pathlight/mdp.hpp"
#include "pathlight/planning.hpp"
#include "pathlight/reward.hpp"
#include "pathlight/trajectory.hpp"

namespace pathlight {

/// Visitation counts of demonstrations: one unit per demo per step, stopping
/// at the first arrival at the demo's goal (its last state), which is not
/// counted.
Svf demo_svf(std::span<const Trajectory> demos, const Mdp& mdp, int horizon);

/// Log-likelihood of one demonstration under the goal-conditioned policy,
/// log prod_n pi^(n)(a_n|s_n), with s_init and s_goal read from the demo's
/// endpoints.
double log_likelihood(const RewardModel& model, const Trajectory& demo, const Mdp& mdp,
                      const StateFeatures& features, int horizon);

/// dL/dtheta = sum_s (D_tau(s) - D_theta(s)) dr(s)/dtheta for one demo.
std::vector<double> irl_gradient(const RewardModel& model, const Trajectory& demo, const Mdp& mdp,
                                 const StateFeatures& features, int horizon);

struct BatchObjective {
  double log_likelihood = 0.0;  // summed over the batch
  std::vector<double> gradient;  // summed over the batch
};

/// Summed objective and gradient for a batch. Demos sharing a goal share one
/// value iteration and one propagation (the SVF is linear in the start
/// distribution), so the result equals the sum of per-demo calls.
BatchObjective batch_objective(const RewardModel& model, std::span<const Trajectory> demos, const Mdp& mdp,
                               const StateFeatures& features, int horizon);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 20;
  int batch = 16;
  std::uint64_t seed = 1;
  int horizon = kDefaultHorizon;
  // Initial model for the map-level overload.
  RewardModel::Kind kind = RewardModel::Kind::Linear;
  int hidden = 16;

  void validate() const;
};

struct TrainResult {
  RewardModel model;
  std::vector<double> epoch_log_likelihood;  // mean per demo, one entry per epoch
};

/// Stochastic gradient ascent on the summed demo log-likelihood. Each step
/// averages the gradient over a batch; demo order is reshuffled per epoch.
TrainResult train(std::span<const Trajectory> demos, const Mdp& mdp, const StateFeatures& features,
                  RewardModel initial, const TrainConfig& config);

TrainResult train(std::span<const Trajectory> demos, const GridMap& map, const TrainConfig& config);

// Mean per-demo log-likelihood over a dataset.
double mean_log_likelihood(const RewardModel& model, std::span<const Trajectory> demos, const Mdp& mdp,
                           const StateFeatures& features, int horizon);

}  // namespace pathlight
