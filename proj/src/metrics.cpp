#include "pathlight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pathlight {

namespace {

void check_lengths(const ForecastSet& forecast, const PointPath& truth) {
  if (forecast.paths.empty()) throw ForecastError(ForecastError::Kind::LengthMismatch, "forecast has no paths");
  if (truth.empty()) throw ForecastError(ForecastError::Kind::LengthMismatch, "truth is empty");
  for (const PointPath& p : forecast.paths)
    if (p.size() != truth.size())
      throw ForecastError(ForecastError::Kind::LengthMismatch,
                          "forecast length " + std::to_string(p.size()) + " vs truth " + std::to_string(truth.size()));
}

}  // namespace

double min_ade(const ForecastSet& forecast, const PointPath& truth) {
  check_lengths(forecast, truth);
  double best = std::numeric_limits<double>::infinity();
  for (const PointPath& p : forecast.paths) {
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) acc += distance(p[i], truth[i]);
    best = std::min(best, acc / static_cast<double>(truth.size()));
  }
  return best;
}

double min_fde(const ForecastSet& forecast, const PointPath& truth) {
  check_lengths(forecast, truth);
  double best = std::numeric_limits<double>::infinity();
  for (const PointPath& p : forecast.paths) best = std::min(best, distance(p.back(), truth.back()));
  return best;
}

std::vector<ForecastExample> make_examples(std::span<const Trajectory> trajs, const Mdp& mdp,
                                           double observed_fraction, int points) {
  std::vector<ForecastExample> out;
  for (const Trajectory& t : trajs) {
    const int steps = t.length();
    if (steps < 2) continue;
    const int cut = std::clamp(static_cast<int>(std::lround(observed_fraction * steps)), 0, steps - 1);
    ForecastExample ex;
    ex.history.person = t.id;
    ex.history.cells.assign(t.states.begin(), t.states.begin() + cut + 1);
    Trajectory future;
    future.states.assign(t.states.begin() + cut, t.states.end());
    future.actions.assign(t.actions.begin() + cut, t.actions.end());
    ex.truth = resample_path(future, mdp, points);
    out.push_back(std::move(ex));
  }
  return out;
}

double MetricsTable::value(const std::string& metric, int k) const {
  for (const MetricRow& r : rows)
    if (r.metric == metric && r.k == k) return r.value;
  throw std::out_of_range("no metric " + metric + " for K=" + std::to_string(k));
}

MetricsTable evaluate(std::span<const ForecastExample> dataset, const GoalPolicies& policies, const Mdp& mdp,
                      const EvalConfig& config) {
  std::vector<double> ade(config.ks.size(), 0.0);
  std::vector<double> fde(config.ks.size(), 0.0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ForecastExample& ex = dataset[i];
    const std::uint64_t seed = config.seed + i;
    const GoalPosterior post = infer_goals(ex.history, policies, mdp);
    const SampleSet samples =
        sample_goal_mixture(ex.history, post, policies, mdp, config.samples, config.points, seed);
    for (std::size_t j = 0; j < config.ks.size(); ++j) {
      const ForecastSet fs = cluster_paths(samples.paths, samples.weights, config.ks[j], seed);
      ade[j] += min_ade(fs, ex.truth);
      fde[j] += min_fde(fs, ex.truth);
    }
  }
  MetricsTable table;
  table.examples = dataset.size();
  const double n = dataset.empty() ? 1.0 : static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < config.ks.size(); ++j) {
    table.rows.push_back({"MinADE", config.ks[j], ade[j] / n});
    table.rows.push_back({"MinFDE", config.ks[j], fde[j] / n});
  }
  return table;
}

std::string format_metrics(const MetricsTable& table) {
  std::string out = "metric,K,value\n";
  char buf[64];
  for (const MetricRow& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.value);
    out += r.metric + "," + std::to_string(r.k) + "," + buf + "\n";
  }
  return out;
}

}  // namespace pathlight
