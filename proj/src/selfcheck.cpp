#include "pathlight/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pathlight/enumerate.hpp"
#include "pathlight/forecast.hpp"
#include "pathlight/random.hpp"

namespace pathlight {

namespace {

constexpr const char* kOpenRoom =
    "#####\n"
    "#AAA#\n"
    "#AAA#\n"
    "#AAA#\n"
    "#####\n"
    "\n"
    "A=room,2,2\n";

constexpr const char* kTwoRooms =
    "#######\n"
    "#AAABB#\n"
    "#AAABB#\n"
    "#AA#BB#\n"
    "#AAABB#\n"
    "#AAABB#\n"
    "#######\n"
    "\n"
    "A=west,3,1\n"
    "B=east,3,5\n";

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> random_reward(Rng& rng, int states) {
  std::vector<double> r(static_cast<std::size_t>(states));
  for (double& x : r) x = -0.05 - 2.0 * rng.uniform();
  return r;
}

// A goal-reaching demo sampled from the model's own policy.
Trajectory sample_demo(Rng& rng, const Mdp& mdp, std::span<const double> reward, int horizon) {
  while (true) {
    const StateId s = static_cast<StateId>(rng.index(static_cast<std::uint64_t>(mdp.state_count())));
    const StateId g = static_cast<StateId>(rng.index(static_cast<std::uint64_t>(mdp.state_count())));
    if (s == g) continue;
    const Policy pi = value_iteration(reward, GoalSpec{g}, horizon, mdp);
    Trajectory t = sample_paths(pi, s, GoalSpec{g}, 1, rng.index(UINT64_MAX), mdp).front();
    if (t.last() == g) return t;
  }
}

CheckResult check_enumeration(const SelfcheckOptions& opt) {
  const GridMap map = parse_map(kOpenRoom);
  const Mdp mdp(map);
  Rng rng(opt.seed);
  const int instances = opt.quick ? 5 : 20;
  double worst = 0.0;
  std::size_t paths = 0;
  for (int i = 0; i < instances; ++i) {
    const int horizon = 3 + static_cast<int>(rng.index(4));
    const auto r = random_reward(rng, mdp.state_count());
    const StateId s = static_cast<StateId>(rng.index(9));
    StateId g = static_cast<StateId>(rng.index(9));
    if (g == s) g = (g + 4) % 9;
    const Policy pi = value_iteration(r, GoalSpec{g}, horizon, mdp);
    const PathDistribution dist = enumerate_paths(r, s, GoalSpec{g}, horizon, mdp);
    for (const EnumeratedPath& p : dist.paths) {
      worst = std::max(worst, std::abs(std::exp(action_sequence_log_prob(pi, mdp, s, p.actions)) - p.probability));
      ++paths;
    }
    if (dist.partition > 0.0) worst = std::max(worst, std::abs(std::log(dist.partition) - pi.value(0, s)));
  }
  return {"enumeration-equivalence", worst <= 1e-9,
          fmt("%.0f paths, max abs error %.3g", static_cast<double>(paths), worst)};
}

CheckResult check_gradient(const SelfcheckOptions& opt) {
  const GridMap map = parse_map(kTwoRooms);
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  Rng rng(opt.seed + 1);
  const int instances = opt.quick ? 10 : 100;
  const int horizon = 12;
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    std::vector<double> theta(static_cast<std::size_t>(sf.dim));
    for (double& x : theta) x = 0.5 * rng.normal();
    RewardModel model = RewardModel::linear(sf.dim, theta);
    const Trajectory demo = sample_demo(rng, mdp, reward_field(model, sf), horizon);
    const std::vector<double> analytic = opt.gradient(model, demo, mdp, sf, horizon);
    double diff = 0.0;
    double scale = 1e-8;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      RewardModel up = model;
      RewardModel down = model;
      up.theta()[k] += h;
      down.theta()[k] -= h;
      const double fd =
          (log_likelihood(up, demo, mdp, sf, horizon) - log_likelihood(down, demo, mdp, sf, horizon)) / (2 * h);
      diff = std::max(diff, std::abs(fd - analytic[k]));
      scale = std::max({scale, std::abs(fd), std::abs(analytic[k])});
    }
    worst = std::max(worst, diff / scale);
  }
  return {"gradient-finite-difference", worst <= 1e-4, fmt("max relative error %.3g", worst)};
}

CheckResult check_properties(const SelfcheckOptions& opt) {
  const GridMap map = parse_map(kTwoRooms);
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  Rng rng(opt.seed + 2);
  const int instances = opt.quick ? 20 : 100;
  double row_err = 0.0;
  double pin_err = 0.0;
  double mass_rise = 0.0;
  double max_reward = -INFINITY;
  for (int i = 0; i < instances; ++i) {
    const int horizon = 1 + static_cast<int>(rng.index(20));
    std::vector<double> theta(static_cast<std::size_t>(sf.dim));
    for (double& x : theta) x = 3.0 * rng.normal();
    const auto r = reward_field(RewardModel::linear(sf.dim, theta), sf);
    for (double x : r) max_reward = std::max(max_reward, x);
    const StateId g = static_cast<StateId>(rng.index(static_cast<std::uint64_t>(mdp.state_count())));
    const Policy pi = value_iteration(r, GoalSpec{g}, horizon, mdp);
    // start somewhere the goal is reachable from within the horizon
    StateId s = g;
    do {
      s = static_cast<StateId>(rng.index(static_cast<std::uint64_t>(mdp.state_count())));
    } while (s != g && !pi.reachable(1, s));
    for (int n = 1; n <= horizon; ++n)
      for (StateId x = 0; x < mdp.state_count(); ++x) {
        if (!pi.reachable(n, x)) continue;
        double sum = 0.0;
        for (double p : pi.row_probs(n, x)) sum += p;
        row_err = std::max(row_err, std::abs(sum - 1.0));
      }
    for (int n = 0; n <= horizon; ++n) pin_err = std::max(pin_err, std::abs(pi.value(n, g)));
    const Svf d = policy_propagation(pi, s, GoalSpec{g}, horizon, mdp);
    for (int n = 1; n <= horizon; ++n) mass_rise = std::max(mass_rise, d.step_mass(n + 1) - d.step_mass(n));
  }
  const bool ok = row_err <= 1e-12 && pin_err == 0.0 && mass_rise <= 1e-12 && max_reward <= 0.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "row error %.3g, goal value %.3g, mass rise %.3g, max reward %.3g", row_err,
                pin_err, mass_rise, max_reward);
  return {"structural-properties", ok, buf};
}

}  // namespace

std::vector<double> sign_flipped_gradient(const RewardModel& model, const Trajectory& demo, const Mdp& mdp,
                                          const StateFeatures& features, int horizon) {
  std::vector<double> g = irl_gradient(model, demo, mdp, features, horizon);
  for (double& x : g) x = -x;
  return g;
}

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options) {
  std::vector<CheckResult> out;
  out.push_back(check_enumeration(options));
  out.push_back(check_gradient(options));
  out.push_back(check_properties(options));
  return out;
}

}  // namespace pathlight
