#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pathlight/forecast.hpp"

namespace pathlight {

/// K predicted paths, heaviest first. Each path is an actual sample (the
/// medoid of its cluster), so it never cuts through walls.
struct ForecastSet {
  int k = 0;
  std::vector<PointPath> paths;
  std::vector<double> weights;  // cluster mass fractions, sum to 1
};

struct ClusterReport {
  ForecastSet forecast;
  std::vector<int> assignment;         // cluster per sample, in forecast order
  std::vector<double> objective;       // weighted SSE after each assignment step
  int iterations = 0;
};

inline constexpr int kMaxLloydIterations = 100;
inline constexpr double kCentroidTolerance = 1e-9;

/// Weighted K-means over paths flattened to 2L coordinates. Seeding picks a
/// seeded random first centre, then repeatedly the sample farthest from all
/// chosen centres. Lloyd iterations stop after 100 rounds or once no centroid
/// moves more than 1e-9.
ClusterReport cluster_paths_report(std::span<const PointPath> samples, std::span<const double> weights, int k,
                                   std::uint64_t seed);

ForecastSet cluster_paths(std::span<const PointPath> samples, std::span<const double> weights, int k,
                          std::uint64_t seed);

}  // namespace pathlight
