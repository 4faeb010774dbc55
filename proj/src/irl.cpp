#include "pathlight/irl.hpp"

#include <cmath>
#include <map>

#include "pathlight/random.hpp"

namespace pathlight {

namespace {

std::size_t checked_demo_length(const Trajectory& demo, const Mdp& mdp, int horizon) {
  check_trajectory(demo, mdp);
  const std::size_t k = steps_before_arrival(demo, demo.last());
  if (k > static_cast<std::size_t>(horizon))
    throw IrlError(IrlError::Kind::InconsistentTrajectory, "demo " + std::to_string(demo.id) + " takes " +
                                                               std::to_string(k) + " steps, more than horizon " +
                                                               std::to_string(horizon));
  return k;
}

void add_demo_counts(const Trajectory& demo, std::size_t k, Svf& svf) {
  const auto S = static_cast<std::size_t>(svf.state_count);
  for (std::size_t i = 0; i < k; ++i) {
    const auto s = static_cast<std::size_t>(demo.states[i]);
    svf.per_step[i * S + s] += 1.0;
    svf.cumulative[s] += 1.0;
  }
  svf.absorbed[k] += 1.0;
}

double demo_log_prob(const Policy& policy, const Trajectory& demo, std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const int n = static_cast<int>(i) + 1;
    const StateId s = demo.states[i];
    const double p = policy.reachable(n, s) ? policy.prob(n, s, demo.actions[i]) : 0.0;
    if (p <= 0.0)
      throw IrlError(IrlError::Kind::ZeroProbabilityStep,
                     "demo " + std::to_string(demo.id) + " has zero probability at step " + std::to_string(n), n);
    acc += std::log(p);
  }
  return acc;
}

Svf empty_svf(const Mdp& mdp, int horizon) {
  Svf svf;
  svf.horizon = horizon;
  svf.state_count = mdp.state_count();
  svf.per_step.assign(static_cast<std::size_t>(horizon + 1) * mdp.state_count(), 0.0);
  svf.cumulative.assign(static_cast<std::size_t>(mdp.state_count()), 0.0);
  svf.absorbed.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  return svf;
}

}  // namespace

Svf demo_svf(std::span<const Trajectory> demos, const Mdp& mdp, int horizon) {
  Svf svf = empty_svf(mdp, horizon);
  for (const Trajectory& demo : demos) add_demo_counts(demo, checked_demo_length(demo, mdp, horizon), svf);
  return svf;
}

double log_likelihood(const RewardModel& model, const Trajectory& demo, const Mdp& mdp,
                      const StateFeatures& features, int horizon) {
  const std::size_t k = checked_demo_length(demo, mdp, horizon);
  const std::vector<double> r = reward_field(model, features);
  const Policy policy = value_iteration(r, GoalSpec{demo.last()}, horizon, mdp);
  return demo_log_prob(policy, demo, k);
}

std::vector<double> irl_gradient(const RewardModel& model, const Trajectory& demo, const Mdp& mdp,
                                 const StateFeatures& features, int horizon) {
  const std::size_t k = checked_demo_length(demo, mdp, horizon);
  const std::vector<double> r = reward_field(model, features);
  const GoalSpec goal{demo.last()};
  const Policy policy = value_iteration(r, goal, horizon, mdp);
  const Svf expected = policy_propagation(policy, demo.start(), goal, horizon, mdp);
  Svf observed = empty_svf(mdp, horizon);
  add_demo_counts(demo, k, observed);

  std::vector<double> coeff(static_cast<std::size_t>(mdp.state_count()));
  for (std::size_t s = 0; s < coeff.size(); ++s) coeff[s] = observed.cumulative[s] - expected.cumulative[s];
  return chain_reward_gradient(model, features, coeff);
}

BatchObjective batch_objective(const RewardModel& model, std::span<const Trajectory> demos, const Mdp& mdp,
                               const StateFeatures& features, int horizon) {
  const std::vector<double> r = reward_field(model, features);
  const auto S = static_cast<std::size_t>(mdp.state_count());

  std::map<StateId, std::vector<std::size_t>> by_goal;
  std::vector<std::size_t> lengths(demos.size());
  for (std::size_t i = 0; i < demos.size(); ++i) {
    lengths[i] = checked_demo_length(demos[i], mdp, horizon);
    by_goal[demos[i].last()].push_back(i);
  }

  BatchObjective out;
  std::vector<double> coeff(S, 0.0);
  for (const auto& [goal_state, members] : by_goal) {
    const GoalSpec goal{goal_state};
    const Policy policy = value_iteration(r, goal, horizon, mdp);
    std::vector<double> starts(S, 0.0);
    for (std::size_t i : members) {
      const Trajectory& demo = demos[i];
      out.log_likelihood += demo_log_prob(policy, demo, lengths[i]);
      starts[static_cast<std::size_t>(demo.start())] += 1.0;
      for (std::size_t j = 0; j < lengths[i]; ++j) coeff[static_cast<std::size_t>(demo.states[j])] += 1.0;
    }
    const Svf expected = propagate_distribution(policy, starts, goal, horizon, mdp);
    for (std::size_t s = 0; s < S; ++s) coeff[s] -= expected.cumulative[s];
  }
  out.gradient = chain_reward_gradient(model, features, coeff);
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw IrlError(IrlError::Kind::InvalidConfig, "learning_rate must be positive");
  if (epochs < 1) throw IrlError(IrlError::Kind::InvalidConfig, "epochs must be at least 1");
  if (batch < 1) throw IrlError(IrlError::Kind::InvalidConfig, "batch must be at least 1");
  if (horizon < 1) throw IrlError(IrlError::Kind::InvalidConfig, "horizon must be at least 1");
}

TrainResult train(std::span<const Trajectory> demos, const Mdp& mdp, const StateFeatures& features,
                  RewardModel initial, const TrainConfig& config) {
  config.validate();
  if (demos.empty()) throw IrlError(IrlError::Kind::InvalidConfig, "training needs at least one demonstration");
  for (const Trajectory& d : demos) checked_demo_length(d, mdp, config.horizon);

  TrainResult result{std::move(initial), {}};
  RewardModel& model = result.model;
  Rng rng(config.seed);
  std::vector<std::size_t> order(demos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Trajectory> batch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_ll = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(demos[order[i]]);
      const BatchObjective obj = batch_objective(model, batch, mdp, features, config.horizon);
      bool finite = std::isfinite(obj.log_likelihood);
      for (double g : obj.gradient) finite = finite && std::isfinite(g);
      if (!finite)
        throw IrlError(IrlError::Kind::NonFiniteLoss, "non-finite objective in epoch " + std::to_string(epoch),
                       epoch);
      epoch_ll += obj.log_likelihood;
      const double step = config.learning_rate / static_cast<double>(batch.size());
      for (std::size_t j = 0; j < obj.gradient.size(); ++j) model.theta()[j] += step * obj.gradient[j];
    }
    result.epoch_log_likelihood.push_back(epoch_ll / static_cast<double>(demos.size()));
  }
  return result;
}

TrainResult train(std::span<const Trajectory> demos, const GridMap& map, const TrainConfig& config) {
  config.validate();
  const Mdp mdp(map);
  const FeatureField field = features(map);
  const StateFeatures sf = state_features(field, mdp);
  RewardModel initial = config.kind == RewardModel::Kind::Linear
                            ? RewardModel::linear(field.dim())
                            : RewardModel::mlp(field.dim(), config.hidden, config.seed);
  return train(demos, mdp, sf, std::move(initial), config);
}

double mean_log_likelihood(const RewardModel& model, std::span<const Trajectory> demos, const Mdp& mdp,
                           const StateFeatures& features, int horizon) {
  if (demos.empty()) return 0.0;
  return batch_objective(model, demos, mdp, features, horizon).log_likelihood / static_cast<double>(demos.size());
}

}  // namespace pathlight
