#include <gtest/gtest.h>

#include <cmath>

#include "pathlight/enumerate.hpp"
#include "pathlight/irl.hpp"
#include "pathlight/random.hpp"
#include "pathlight/reward_spec.hpp"
#include "pathlight/synth.hpp"
#include "pathlight/trajectory.hpp"
#include "test_support.hpp"

using namespace pathlight;
using namespace testing_support;

namespace {

struct World {
  GridMap map;
  Mdp mdp;
  StateFeatures sf;
  explicit World(const std::string& text)
      : map(parse_map(text)), mdp(map), sf(state_features(features(map), mdp)) {}
};

Trajectory path(const Mdp& mdp, Cell start, std::initializer_list<Action> acts) {
  return make_trajectory(mdp, *mdp.state_of(start), std::vector<Action>(acts));
}

RewardModel random_linear(int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta(static_cast<std::size_t>(dim));
  for (double& x : theta) x = 2.0 * rng.uniform() - 1.0;
  return RewardModel::linear(dim, theta);
}

// Random walks that end wherever they stop; the last state is the goal.
std::vector<Trajectory> random_walks(const Mdp& mdp, int count, int max_len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Trajectory> out;
  while (static_cast<int>(out.size()) < count) {
    const StateId s = static_cast<StateId>(rng.index(static_cast<std::size_t>(mdp.state_count())));
    std::vector<Action> acts;
    const int len = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_len)));
    for (int i = 0; i < len; ++i) acts.push_back(kActions[rng.index(4)]);
    Trajectory t = make_trajectory(mdp, s, acts);
    // cut at the first arrival at the final state
    const std::size_t k = steps_before_arrival(t, t.last());
    if (k == 0) continue;
    t.actions.resize(k);
    t.states.resize(k + 1);
    t.id = static_cast<int>(out.size());
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(DemoSvf, CountsStepsBeforeArrival) {
  const World w(kCorridor);
  const Svf d = demo_svf(std::vector<Trajectory>{path(w.mdp, {1, 1}, {Action::Right})}, w.mdp, 3);
  EXPECT_EQ(d.at(1, 0), 1.0);
  EXPECT_EQ(d.at(1, 1), 0.0);
  EXPECT_EQ(d.cumulative[0], 1.0);
  EXPECT_EQ(d.cumulative[1], 0.0);
  EXPECT_EQ(d.absorbed[1], 1.0);
}

TEST(DemoSvf, SelfLoopsCountEachStep) {
  const World w(kOpenRoom3);
  const Trajectory t = path(w.mdp, {1, 1}, {Action::Up, Action::Up, Action::Right});
  const Svf d = demo_svf(std::vector<Trajectory>{t}, w.mdp, 5);
  // two self-loops then the step out: three visits
  EXPECT_EQ(d.cumulative[static_cast<std::size_t>(*w.mdp.state_of({1, 1}))], 3.0);
  EXPECT_EQ(d.absorbed[3], 1.0);
}

TEST(DemoSvf, LongerThanHorizonIsInconsistent) {
  const World w(kOpenRoom3);
  const Trajectory t = path(w.mdp, {1, 1}, {Action::Right, Action::Right, Action::Down});
  try {
    demo_svf(std::vector<Trajectory>{t}, w.mdp, 2);
    FAIL();
  } catch (const IrlError& e) {
    EXPECT_EQ(e.kind(), IrlError::Kind::InconsistentTrajectory);
  }
}

TEST(IrlGradient, SinglePathInstanceIsStationary) {
  const World w(kCorridor);
  const Trajectory t = path(w.mdp, {1, 1}, {Action::Right});
  for (double x : irl_gradient(random_linear(w.sf.dim, 2), t, w.mdp, w.sf, 1)) EXPECT_LE(std::abs(x), 1e-8);
}

TEST(IrlGradient, MatchesFiniteDifference) {
  const World w(kTwoRooms5);
  const int N = 12;
  const auto demos = random_walks(w.mdp, 6, 10, 21);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const RewardModel& model : {random_linear(w.sf.dim, seed), RewardModel::mlp(w.sf.dim, 4, seed)}) {
      for (const Trajectory& t : demos) {
        const auto g = irl_gradient(model, t, w.mdp, w.sf, N);
        for (std::size_t k = 0; k < model.param_count(); ++k) {
          RewardModel up = model;
          RewardModel down = model;
          up.theta()[k] += 1e-5;
          down.theta()[k] -= 1e-5;
          const double fd =
              (log_likelihood(up, t, w.mdp, w.sf, N) - log_likelihood(down, t, w.mdp, w.sf, N)) / 2e-5;
          EXPECT_NEAR(g[k], fd, 1e-6 + 1e-4 * std::abs(fd)) << "param " << k;
        }
      }
    }
  }
}

TEST(IrlGradient, DuplicatedDemoDoublesGradient) {
  const World w(kTwoRooms5);
  const RewardModel model = random_linear(w.sf.dim, 4);
  const Trajectory t = random_walks(w.mdp, 1, 10, 5)[0];
  const auto once = irl_gradient(model, t, w.mdp, w.sf, 12);
  const BatchObjective twice = batch_objective(model, std::vector<Trajectory>{t, t}, w.mdp, w.sf, 12);
  for (std::size_t k = 0; k < once.size(); ++k) EXPECT_NEAR(twice.gradient[k], 2.0 * once[k], 1e-10);
}

TEST(BatchObjective, EqualsSumOfPerDemoCalls) {
  const World w(kTwoRooms5);
  const RewardModel model = RewardModel::mlp(w.sf.dim, 3, 8);
  // few distinct end states so several demos share a goal
  const auto demos = random_walks(w.mdp, 12, 6, 9);
  const BatchObjective b = batch_objective(model, demos, w.mdp, w.sf, 10);
  double ll = 0.0;
  std::vector<double> g(model.param_count(), 0.0);
  for (const Trajectory& t : demos) {
    ll += log_likelihood(model, t, w.mdp, w.sf, 10);
    const auto gi = irl_gradient(model, t, w.mdp, w.sf, 10);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gi[k];
  }
  EXPECT_NEAR(b.log_likelihood, ll, 1e-9);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(b.gradient[k], g[k], 1e-9);
}

TEST(LogLikelihood, UniquePathIsZero) {
  const World w(kCorridor);
  EXPECT_NEAR(log_likelihood(random_linear(w.sf.dim, 3), path(w.mdp, {1, 1}, {Action::Right}), w.mdp, w.sf, 1),
              0.0, 1e-12);
}

TEST(LogLikelihood, MatchesEnumeratedPathProbability) {
  const World w(kOpenRoom3);
  const int N = 5;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const RewardModel model = random_linear(w.sf.dim, seed);
    const auto r = reward_field(model, w.sf);
    for (const Trajectory& t : random_walks(w.mdp, 5, N, seed + 10)) {
      const PathDistribution dist = enumerate_paths(r, t.start(), GoalSpec{t.last()}, N, w.mdp);
      double p = 0.0;
      for (const EnumeratedPath& e : dist.paths)
        if (e.actions == t.actions) p = e.probability;
      ASSERT_GT(p, 0.0);
      EXPECT_NEAR(log_likelihood(model, t, w.mdp, w.sf, N), std::log(p), 1e-9);
    }
  }
}

TEST(LogLikelihood, UnderflowedStepIsReported) {
  const World w(kTwoRooms5);
  // Crossing into the east zone costs about 800 nats per cell.
  const RewardModel model = parse_reward_spec("zone:east=800", features(w.map));
  const Trajectory t = path(w.mdp, {1, 3}, {Action::Right, Action::Down, Action::Left});
  try {
    log_likelihood(model, t, w.mdp, w.sf, 3);
    FAIL();
  } catch (const IrlError& e) {
    EXPECT_EQ(e.kind(), IrlError::Kind::ZeroProbabilityStep);
    EXPECT_EQ(e.index(), 1);
  }
}

TEST(Train, RejectsBadConfig) {
  const World w(kTwoRooms5);
  const auto demos = random_walks(w.mdp, 4, 6, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  try {
    train(demos, w.map, cfg);
    FAIL();
  } catch (const IrlError& e) {
    EXPECT_EQ(e.kind(), IrlError::Kind::InvalidConfig);
  }
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(demos, w.map, cfg), IrlError);
  cfg.learning_rate = 0.05;
  EXPECT_THROW(train(std::vector<Trajectory>{}, w.map, cfg), IrlError);
}

TEST(Train, DeterministicAndImproving) {
  const World w(kTwoRooms5);
  DemoConfig dc;
  dc.count = 40;
  dc.min_length = 3;
  dc.horizon = 16;
  dc.seed = 4;
  const auto demos = generate_demos(w.map, parse_reward_spec("free=1 dist_wall=-2 zone:east=0.5", features(w.map)), dc);
  ASSERT_EQ(demos.size(), 40u);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch = 8;
  cfg.horizon = 16;
  cfg.learning_rate = 0.1;
  const TrainResult a = train(demos, w.map, cfg);
  const TrainResult b = train(demos, w.map, cfg);
  EXPECT_EQ(a.model.theta(), b.model.theta());
  EXPECT_EQ(a.epoch_log_likelihood, b.epoch_log_likelihood);
  ASSERT_EQ(a.epoch_log_likelihood.size(), 8u);
  EXPECT_GT(a.epoch_log_likelihood.back(), a.epoch_log_likelihood.front());
  const double zero = mean_log_likelihood(RewardModel::linear(w.sf.dim), demos, w.mdp, w.sf, 16);
  EXPECT_GT(mean_log_likelihood(a.model, demos, w.mdp, w.sf, 16), zero);
}

TEST(TrajectoryFile, RoundTripAndRejects) {
  const World w(kTwoRooms5);
  auto demos = random_walks(w.mdp, 5, 8, 3);
  demos[1].goal_zone = 1;
  const std::string text = format_trajectories(demos, w.mdp);
  EXPECT_EQ(parse_trajectories(text, w.mdp), demos);
  EXPECT_TRUE(parse_trajectories("", w.mdp).empty());
  // action does not lead to the next cell
  EXPECT_THROW(parse_trajectories("0,-,(1,1,R),(2,1,.)\n", w.mdp), IrlError);
  // wall cell
  EXPECT_THROW(parse_trajectories("0,-,(0,0,.)\n", w.mdp), IrlError);
  EXPECT_THROW(parse_trajectories("0,-,(1,1,.)", w.mdp), IrlError);
  EXPECT_NO_THROW(parse_trajectories("0,-,(1,1,R),(1,2,.)\n", w.mdp));
}
