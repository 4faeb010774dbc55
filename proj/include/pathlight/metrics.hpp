#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathlight/cluster.hpp"
#include "pathlight/forecast.hpp"

namespace pathlight {

// Mean / final Euclidean displacement in cell units, minimised over paths.
double min_ade(const ForecastSet& forecast, const PointPath& truth);
double min_fde(const ForecastSet& forecast, const PointPath& truth);

struct ForecastExample {
  ObservedHistory history;
  PointPath truth;  // future path from the last observed cell, resampled
};

/// Splits each trajectory into an observed prefix covering `observed_fraction`
/// of its steps (at least one cell) and a resampled future. Trajectories with
/// fewer than two steps are skipped.
std::vector<ForecastExample> make_examples(std::span<const Trajectory> trajs, const Mdp& mdp,
                                           double observed_fraction = 0.4, int points = kDefaultResamplePoints);

struct EvalConfig {
  std::vector<int> ks{20, 5};
  int samples = kDefaultSamples;
  int points = kDefaultResamplePoints;
  std::uint64_t seed = 1;
};

struct MetricRow {
  std::string metric;  // "MinADE" | "MinFDE"
  int k;
  double value;
};

struct MetricsTable {
  std::vector<MetricRow> rows;
  std::size_t examples = 0;

  double value(const std::string& metric, int k) const;
};

/// Goal inference, mixture sampling, clustering and scoring per example;
/// the table holds the mean over examples, ordered MinADE/MinFDE per K.
MetricsTable evaluate(std::span<const ForecastExample> dataset, const GoalPolicies& policies, const Mdp& mdp,
                      const EvalConfig& config = {});

std::string format_metrics(const MetricsTable& table);

}  // namespace pathlight
