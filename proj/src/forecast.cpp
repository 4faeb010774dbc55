#include "pathlight/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathlight/random.hpp"

namespace pathlight {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Point centre(const Mdp& mdp, StateId s) {
  const Cell c = mdp.cell(s);
  return {static_cast<double>(c.row), static_cast<double>(c.col)};
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.row - b.row, a.col - b.col); }

void check_history(const ObservedHistory& history, const Mdp& mdp) {
  if (history.cells.empty()) throw ForecastError(ForecastError::Kind::InvalidHistory, "history is empty");
  if (!history.ticks.empty() && history.ticks.size() != history.cells.size())
    throw ForecastError(ForecastError::Kind::InvalidHistory, "history ticks and cells differ in length");
  for (std::size_t i = 0; i < history.cells.size(); ++i) {
    if (!mdp.valid(history.cells[i]))
      throw ForecastError(ForecastError::Kind::InvalidHistory, "history holds an invalid state");
    if (i > 0 && history.cells[i] != history.cells[i - 1] &&
        !mdp.action_between(history.cells[i - 1], history.cells[i]))
      throw ForecastError(ForecastError::Kind::InvalidHistory,
                          "history cells " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not adjacent");
  }
}

const GoalPosterior::Entry& GoalPosterior::best() const {
  if (entries.empty()) throw ForecastError(ForecastError::Kind::NoGoals, "posterior has no goals");
  const Entry* top = &entries.front();
  for (const Entry& e : entries)
    if (e.weight > top->weight) top = &e;
  return *top;
}

double GoalPosterior::weight_of_zone(int zone_id) const {
  for (const Entry& e : entries)
    if (e.zone_id == zone_id) return e.weight;
  return 0.0;
}

GoalPolicies::GoalPolicies(const GridMap& map, const Mdp& mdp, std::span<const double> reward, int horizon)
    : horizon_(horizon), goals_(goal_candidates(map)) {
  for (const GoalCandidate& g : goals_) {
    const StateId s = *mdp.state_of(g.anchor);
    goal_states_.push_back(s);
    policies_.push_back(value_iteration(reward, GoalSpec{s}, horizon, mdp));
  }
}

GoalPolicies GoalPolicies::uniform(const GridMap& map, const Mdp& mdp, int horizon) {
  GoalPolicies out;
  out.horizon_ = horizon;
  out.goals_ = goal_candidates(map);
  for (const GoalCandidate& g : out.goals_) {
    out.goal_states_.push_back(*mdp.state_of(g.anchor));
    out.policies_.push_back(Policy::uniform(horizon, mdp.state_count()));
  }
  return out;
}

GoalPosterior infer_goals(const ObservedHistory& history, const GoalPolicies& policies, const Mdp& mdp) {
  if (policies.size() == 0) throw ForecastError(ForecastError::Kind::NoGoals, "map has no zones");
  check_history(history, mdp);

  std::vector<StateId> path;
  for (StateId s : history.cells)
    if (path.empty() || path.back() != s) path.push_back(s);
  const std::size_t transitions = path.size() - 1;
  const std::size_t used = std::min<std::size_t>(transitions, static_cast<std::size_t>(policies.horizon()));
  const std::size_t first = transitions - used;

  std::vector<double> log_w(policies.size(), 0.0);
  for (std::size_t g = 0; g < policies.size(); ++g) {
    const Policy& pi = policies.policy(g);
    for (std::size_t i = 0; i < used && log_w[g] > kNegInf; ++i) {
      const int n = static_cast<int>(i) + 1;
      const StateId s = path[first + i];
      const Action a = *mdp.action_between(s, path[first + i + 1]);
      const double p = pi.reachable(n, s) ? pi.prob(n, s, a) : 0.0;
      log_w[g] = p > 0.0 ? log_w[g] + std::log(p) : kNegInf;
    }
  }

  const double top = *std::max_element(log_w.begin(), log_w.end());
  GoalPosterior post;
  double total = 0.0;
  for (std::size_t g = 0; g < policies.size(); ++g) {
    // All goals impossible: fall back to the uniform prior.
    const double w = top == kNegInf ? 1.0 : std::exp(log_w[g] - top);
    post.entries.push_back({policies.candidate(g).zone_id, policies.goal_state(g), w});
    total += w;
  }
  for (auto& e : post.entries) e.weight /= total;
  return post;
}

GoalPosterior infer_goals(const ObservedHistory& history, const GridMap& map, const RewardModel& model,
                          int horizon) {
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  const std::vector<double> r = reward_field(model, sf);
  return infer_goals(history, GoalPolicies(map, mdp, r, horizon), mdp);
}

std::vector<Trajectory> sample_paths(const Policy& policy, StateId s_init, GoalSpec goal, int count,
                                     std::uint64_t seed, const Mdp& mdp) {
  if (count < 1) throw ForecastError(ForecastError::Kind::TooFewSamples, "sample count must be at least 1");
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    Trajectory t;
    t.id = m;
    t.states.push_back(s_init);
    for (int n = 1; n <= policy.horizon() && t.last() != goal.goal; ++n) {
      const auto probs = policy.row_probs(n, t.last());
      const double u = rng.uniform();
      double acc = 0.0;
      int chosen = -1;
      for (int a = 0; a < kActionCount; ++a) {
        if (probs[static_cast<std::size_t>(a)] <= 0.0) continue;
        chosen = a;
        acc += probs[static_cast<std::size_t>(a)];
        if (u < acc) break;
      }
      const Action a = static_cast<Action>(chosen);
      t.actions.push_back(a);
      t.states.push_back(mdp.transition(t.last(), a));
    }
    out.push_back(std::move(t));
  }
  return out;
}

PointPath resample_polyline(std::span<const Point> polyline, int points) {
  if (polyline.empty() || points < 2)
    throw ForecastError(ForecastError::Kind::LengthMismatch, "resampling needs a non-empty path and >= 2 points");
  std::vector<double> arc(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) arc[i] = arc[i - 1] + distance(polyline[i - 1], polyline[i]);
  const double total = arc.back();
  PointPath out;
  out.reserve(static_cast<std::size_t>(points));
  if (total == 0.0) {
    out.assign(static_cast<std::size_t>(points), polyline.front());
    return out;
  }
  std::size_t seg = 0;
  for (int j = 0; j < points; ++j) {
    if (j == points - 1) {
      out.push_back(polyline.back());
      break;
    }
    const double target = total * j / (points - 1);
    while (seg + 2 < arc.size() && arc[seg + 1] < target) ++seg;
    const double len = arc[seg + 1] - arc[seg];
    const double t = len > 0.0 ? (target - arc[seg]) / len : 0.0;
    const Point a = polyline[seg];
    const Point b = polyline[seg + 1];
    out.push_back({a.row + t * (b.row - a.row), a.col + t * (b.col - a.col)});
  }
  return out;
}

PointPath resample_path(const Trajectory& traj, const Mdp& mdp, int points) {
  PointPath poly;
  poly.reserve(traj.states.size());
  for (StateId s : traj.states) poly.push_back(centre(mdp, s));
  return resample_polyline(poly, points);
}

std::vector<int> sample_budgets(const GoalPosterior& posterior, int total) {
  std::vector<int> budget(posterior.entries.size(), 0);
  int assigned = 0;
  std::size_t heaviest = 0;
  for (std::size_t g = 0; g < budget.size(); ++g) {
    budget[g] = static_cast<int>(std::lround(total * posterior.entries[g].weight));
    assigned += budget[g];
    if (posterior.entries[g].weight > posterior.entries[heaviest].weight) heaviest = g;
  }
  budget[heaviest] = std::max(0, budget[heaviest] + total - assigned);
  return budget;
}

SampleSet sample_goal_mixture(const ObservedHistory& history, const GoalPosterior& posterior,
                              const GoalPolicies& policies, const Mdp& mdp, int total, int points,
                              std::uint64_t seed) {
  const std::vector<int> budget = sample_budgets(posterior, total);
  SampleSet out;
  double mass = 0.0;
  for (std::size_t g = 0; g < budget.size(); ++g) {
    if (budget[g] == 0) continue;
    const std::uint64_t goal_seed = seed + 0x9E3779B97F4A7C15ull * (g + 1);
    const auto samples =
        sample_paths(policies.policy(g), history.last(), GoalSpec{policies.goal_state(g)}, budget[g], goal_seed, mdp);
    const double each = posterior.entries[g].weight / budget[g];
    for (const Trajectory& t : samples) {
      out.paths.push_back(resample_path(t, mdp, points));
      out.weights.push_back(each);
      out.goal_index.push_back(static_cast<int>(g));
      mass += each;
    }
  }
  if (mass > 0.0)
    for (double& w : out.weights) w /= mass;
  return out;
}

}  // namespace pathlight
