#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathlight/gridmap.hpp"
#include "pathlight/mdp.hpp"
#include "pathlight/planning.hpp"
#include "pathlight/reward.hpp"
#include "pathlight/trajectory.hpp"

namespace pathlight {

class ForecastError : public std::runtime_error {
 public:
  enum class Kind { NoGoals, TooFewSamples, LengthMismatch, InvalidHistory };
  ForecastError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Position in cell units: (row, col) of the cell centre.
struct Point {
  double row = 0.0;
  double col = 0.0;
  bool operator==(const Point&) const = default;
};

using PointPath = std::vector<Point>;

double distance(Point a, Point b);

struct ObservedHistory {
  int person = 0;
  std::vector<StateId> cells;
  std::vector<long> ticks;  // same length as cells, or empty

  StateId last() const { return cells.back(); }
};

// Throws ForecastError(InvalidHistory) if empty or consecutive cells are
// neither equal nor 4-adjacent.
void check_history(const ObservedHistory& history, const Mdp& mdp);

struct GoalPosterior {
  struct Entry {
    int zone_id;
    StateId goal;
    double weight;
  };
  std::vector<Entry> entries;  // ascending zone id

  const Entry& best() const;
  double weight_of_zone(int zone_id) const;
};

/// One goal-conditioned policy per zone anchor, planned for a fixed reward.
class GoalPolicies {
 public:
  GoalPolicies(const GridMap& map, const Mdp& mdp, std::span<const double> reward, int horizon);

  // Random-walk baseline: uniform actions for every goal.
  static GoalPolicies uniform(const GridMap& map, const Mdp& mdp, int horizon);

  std::size_t size() const { return goals_.size(); }
  const GoalCandidate& candidate(std::size_t i) const { return goals_[i]; }
  StateId goal_state(std::size_t i) const { return goal_states_[i]; }
  const Policy& policy(std::size_t i) const { return policies_[i]; }
  int horizon() const { return horizon_; }

 private:
  GoalPolicies() = default;

  int horizon_ = 0;
  std::vector<GoalCandidate> goals_;
  std::vector<StateId> goal_states_;
  std::vector<Policy> policies_;
};

/// Posterior over zone goals from a uniform prior and the likelihood of the
/// observed transitions under each goal's policy. Repeated cells (standing
/// still) are collapsed first; the last `horizon` transitions are scored.
GoalPosterior infer_goals(const ObservedHistory& history, const GoalPolicies& policies, const Mdp& mdp);

GoalPosterior infer_goals(const ObservedHistory& history, const GridMap& map, const RewardModel& model,
                          int horizon);

/// Draws `count` paths by a_n ~ pi^(n)(.|s_n), each stopping at the goal or
/// after the policy horizon. Deterministic for a seed.
std::vector<Trajectory> sample_paths(const Policy& policy, StateId s_init, GoalSpec goal, int count,
                                     std::uint64_t seed, const Mdp& mdp);

/// Arc-length uniform resampling of a polyline to exactly `points` points.
PointPath resample_polyline(std::span<const Point> polyline, int points);
PointPath resample_path(const Trajectory& traj, const Mdp& mdp, int points);

struct SampleSet {
  std::vector<PointPath> paths;  // resampled
  std::vector<double> weights;   // per sample, sums to 1
  std::vector<int> goal_index;   // which GoalPolicies entry produced it
};

inline constexpr int kDefaultSamples = 200;
inline constexpr int kDefaultResamplePoints = 20;

/// Splits `total` samples across goals as round(total * w_g), any remainder
/// to the heaviest goal.
std::vector<int> sample_budgets(const GoalPosterior& posterior, int total);

/// Samples from the goal mixture starting at the history's last cell.
SampleSet sample_goal_mixture(const ObservedHistory& history, const GoalPosterior& posterior,
                              const GoalPolicies& policies, const Mdp& mdp, int total, int points,
                              std::uint64_t seed);

}  // namespace pathlight
