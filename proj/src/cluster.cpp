#include "pathlight/cluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "pathlight/random.hpp"

namespace pathlight {

namespace {

using Vec = std::vector<double>;

Vec flatten(const PointPath& p) {
  Vec v;
  v.reserve(p.size() * 2);
  for (const Point& q : p) {
    v.push_back(q.row);
    v.push_back(q.col);
  }
  return v;
}

double sq_dist(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::size_t nearest(const Vec& x, const std::vector<Vec>& centres) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centres.size(); ++c) {
    const double d = sq_dist(x, centres[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

ClusterReport cluster_paths_report(std::span<const PointPath> samples, std::span<const double> weights, int k,
                                   std::uint64_t seed) {
  if (k < 1) throw ForecastError(ForecastError::Kind::TooFewSamples, "K must be at least 1");
  if (samples.size() < static_cast<std::size_t>(k))
    throw ForecastError(ForecastError::Kind::TooFewSamples,
                        std::to_string(samples.size()) + " samples for K=" + std::to_string(k));
  if (weights.size() != samples.size())
    throw ForecastError(ForecastError::Kind::LengthMismatch, "one weight per sample required");
  const std::size_t len = samples.front().size();
  for (const PointPath& p : samples)
    if (p.size() != len) throw ForecastError(ForecastError::Kind::LengthMismatch, "samples differ in length");

  const std::size_t m = samples.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<Vec> x;
  x.reserve(m);
  for (const PointPath& p : samples) x.push_back(flatten(p));
  double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> w(weights.begin(), weights.end());
  if (!(mass > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0);
    mass = static_cast<double>(m);
  }

  // Seeding: one seeded pick, then farthest-first (ties to the lowest index).
  Rng rng(seed);
  std::vector<Vec> centres;
  centres.push_back(x[rng.index(m)]);
  std::vector<double> gap(m);
  for (std::size_t i = 0; i < m; ++i) gap[i] = sq_dist(x[i], centres[0]);
  while (centres.size() < kk) {
    const std::size_t pick = static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    centres.push_back(x[pick]);
    for (std::size_t i = 0; i < m; ++i) gap[i] = std::min(gap[i], sq_dist(x[i], centres.back()));
  }

  ClusterReport report;
  std::vector<std::size_t> assign(m, 0);
  for (int it = 0; it < kMaxLloydIterations; ++it) {
    double objective = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      assign[i] = nearest(x[i], centres);
      objective += w[i] * sq_dist(x[i], centres[assign[i]]);
    }
    report.objective.push_back(objective);
    report.iterations = it + 1;

    std::vector<Vec> next(kk, Vec(x[0].size(), 0.0));
    std::vector<double> cw(kk, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      cw[assign[i]] += w[i];
      for (std::size_t d = 0; d < x[i].size(); ++d) next[assign[i]][d] += w[i] * x[i][d];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      if (cw[c] > 0.0)
        for (double& v : next[c]) v /= cw[c];
      else
        next[c] = centres[c];
      moved = std::max(moved, sq_dist(next[c], centres[c]));
    }
    centres = std::move(next);
    if (moved < kCentroidTolerance * kCentroidTolerance) break;
  }
  // Final assignment against the settled centroids.
  for (std::size_t i = 0; i < m; ++i) assign[i] = nearest(x[i], centres);

  std::vector<double> cmass(kk, 0.0);
  std::vector<std::size_t> medoid(kk, 0);
  for (std::size_t c = 0; c < kk; ++c) {
    double best = std::numeric_limits<double>::infinity();
    bool has_member = false;
    for (std::size_t i = 0; i < m; ++i)
      if (assign[i] == c) {
        has_member = true;
        cmass[c] += w[i];
      }
    for (std::size_t i = 0; i < m; ++i) {
      if (has_member && assign[i] != c) continue;
      const double d = sq_dist(x[i], centres[c]);
      if (d < best) {
        best = d;
        medoid[c] = i;
      }
    }
  }

  std::vector<std::size_t> order(kk);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cmass[a] > cmass[b]; });
  std::vector<int> rank(kk);
  report.forecast.k = k;
  for (std::size_t r = 0; r < kk; ++r) {
    rank[order[r]] = static_cast<int>(r);
    report.forecast.paths.push_back(samples[medoid[order[r]]]);
    report.forecast.weights.push_back(cmass[order[r]] / mass);
  }
  report.assignment.resize(m);
  for (std::size_t i = 0; i < m; ++i) report.assignment[i] = rank[assign[i]];
  return report;
}

ForecastSet cluster_paths(std::span<const PointPath> samples, std::span<const double> weights, int k,
                          std::uint64_t seed) {
  return cluster_paths_report(samples, weights, k, seed).forecast;
}

}  // namespace pathlight
