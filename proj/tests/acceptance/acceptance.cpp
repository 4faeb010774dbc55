// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "pathlight/enumerate.hpp"
#include "pathlight/irl.hpp"
#include "pathlight/lampnet.hpp"
#include "pathlight/metrics.hpp"
#include "pathlight/reward_spec.hpp"
#include "pathlight/scenario.hpp"
#include "pathlight/synth.hpp"
#include "test_support.hpp"

using namespace pathlight;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr double kPathProbTol = 1e-9;
constexpr int kEnumInstances = 30;
constexpr double kEnumBudgetSec = 30.0;

constexpr int kGradInstances = 100;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kGradBudgetSec = 60.0;

constexpr int kStructInstances = 100;
constexpr double kRowTol = 1e-12;
constexpr double kMassTol = 1e-12;

constexpr int kTrainDemos = 800;
constexpr int kHeldOutDemos = 200;
constexpr double kBaselineGain = 0.5;  // trained <= (1 - gain) * baseline
constexpr double kLikelihoodGap = 0.05;
constexpr double kRecoveryBudgetSec = 300.0;

constexpr int kMetricSets = 1000;

constexpr int kCodecCommands = 10000;

constexpr int kSamplingDraws = 100000;
constexpr double kSamplingSe = 3.0;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// SET detail is "<reason> R G B I".
LightSetting lighting_of_detail(const std::string& detail) {
  std::istringstream in(detail);
  std::string reason;
  LightSetting l;
  in >> reason >> l.red >> l.green >> l.blue >> l.intensity;
  return l;
}

// Probability of an action sequence under a policy, by direct product.
double policy_path_prob(const Policy& pi, const Mdp& mdp, StateId s, const std::vector<Action>& actions) {
  double p = 1.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    p *= pi.prob(static_cast<int>(i) + 1, s, actions[i]);
    s = mdp.transition(s, actions[i]);
  }
  return p;
}

std::vector<double> nonpositive_field(std::mt19937_64& gen, int states) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::bernoulli_distribution zero(0.1);
  std::vector<double> r(static_cast<std::size_t>(states));
  for (double& x : r) x = zero(gen) ? 0.0 : -u(gen);
  return r;
}

// 1. Value-iteration policy vs brute-force path enumeration.
Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const char* maps[] = {kOpenRoom3,
                        "####\n#AA#\n#AA#\n####\n\nA=r,1,1\n",
                        "#####\n#AAA#\n#A#A#\n#AAA#\n#####\n\nA=r,1,1\n"};
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  std::size_t paths = 0;
  for (int i = 0; i < kEnumInstances; ++i) {
    const Mdp mdp(parse_map(maps[i % 3]));
    const int S = mdp.state_count();
    const int N = 1 + static_cast<int>(gen() % 6);
    const auto r = nonpositive_field(gen, S);
    const StateId s = static_cast<StateId>(gen() % S);
    const StateId g = static_cast<StateId>(gen() % S);
    const Policy pi = value_iteration(r, GoalSpec{g}, N, mdp);
    const PathDistribution dist = enumerate_paths(r, s, GoalSpec{g}, N, mdp);
    for (const EnumeratedPath& p : dist.paths) {
      worst = std::max(worst, std::abs(policy_path_prob(pi, mdp, s, p.actions) - p.probability));
      ++paths;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= kPathProbTol && t < kEnumBudgetSec,
          fmt("%d fields, %zu paths, max |p_vi - p_enum| = %.3g (tol %.0e), %.2f s", kEnumInstances, paths, worst,
              kPathProbTol, t)};
}

// 2. Analytic IRL gradient vs central differences of the log-likelihood.
Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridMap map = parse_map(kTwoRooms5);
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  std::mt19937_64 gen(77);
  std::normal_distribution<double> n(0.0, 0.7);
  const int N = 16;
  double worst = 0.0;
  for (int i = 0; i < kGradInstances; ++i) {
    std::vector<double> theta(static_cast<std::size_t>(sf.dim));
    for (double& x : theta) x = n(gen);
    const RewardModel model = RewardModel::linear(sf.dim, theta);
    // demo drawn from the model's own goal-conditioned policy
    Trajectory demo;
    do {
      const StateId s = static_cast<StateId>(gen() % mdp.state_count());
      const StateId g = static_cast<StateId>(gen() % mdp.state_count());
      if (s == g) continue;
      const Policy pi = value_iteration(reward_field(model, sf), GoalSpec{g}, N, mdp);
      demo = sample_paths(pi, s, GoalSpec{g}, 1, gen(), mdp).front();
      if (demo.last() != g) demo = Trajectory{};
    } while (demo.states.empty());

    const auto g = irl_gradient(model, demo, mdp, sf, N);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      RewardModel up = model;
      RewardModel down = model;
      up.theta()[k] += kGradStep;
      down.theta()[k] -= kGradStep;
      const double fd =
          (log_likelihood(up, demo, mdp, sf, N) - log_likelihood(down, demo, mdp, sf, N)) / (2 * kGradStep);
      diff = std::max(diff, std::abs(fd - g[k]));
      scale = std::max({scale, std::abs(fd), std::abs(g[k])});
    }
    worst = std::max(worst, diff / std::max(scale, 1e-8));
  }
  const double t = seconds_since(t0);
  return {worst <= kGradRelTol && t < kGradBudgetSec,
          fmt("%d triples, max relative error %.3g (tol %.0e), %.2f s", kGradInstances, worst, kGradRelTol, t)};
}

// 3. Row-stochastic policies, pinned goal value, monotone SVF mass,
//    nonpositive rewards.
Outcome structural_invariants() {
  const GridMap map = parse_map(kTwoRooms5);
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> wide(0.0, 4.0);
  double row_err = 0.0;
  double goal_value = 0.0;
  double mass_rise = 0.0;
  double max_reward = -INFINITY;
  for (int i = 0; i < kStructInstances; ++i) {
    const RewardModel model = i % 2 == 0 ? RewardModel::linear(sf.dim) : RewardModel::mlp(sf.dim, 8, gen());
    RewardModel m = model;
    for (double& x : m.theta()) x = wide(gen);
    const auto r = reward_field(m, sf);
    for (double x : r) max_reward = std::max(max_reward, x);

    const int N = 1 + static_cast<int>(gen() % 30);
    const StateId g = static_cast<StateId>(gen() % mdp.state_count());
    const Policy pi = value_iteration(r, GoalSpec{g}, N, mdp);
    for (int step = 1; step <= N; ++step)
      for (StateId s = 0; s < mdp.state_count(); ++s) {
        double sum = 0.0;
        for (double p : pi.row_probs(step, s)) {
          if (p < 0.0) row_err = INFINITY;
          sum += p;
        }
        row_err = std::max(row_err, std::abs(sum - 1.0));
      }
    for (int step = 0; step <= N; ++step) goal_value = std::max(goal_value, std::abs(pi.value(step, g)));

    std::vector<double> start(static_cast<std::size_t>(mdp.state_count()), 0.0);
    for (StateId s = 0; s < mdp.state_count(); ++s)
      if (s == g || pi.reachable(1, s)) start[static_cast<std::size_t>(s)] = 1.0;
    double total = 0.0;
    for (double x : start) total += x;
    for (double& x : start) x /= total;
    const Svf d = propagate_distribution(pi, start, GoalSpec{g}, N, mdp);
    for (int step = 1; step <= N; ++step) mass_rise = std::max(mass_rise, d.step_mass(step + 1) - d.step_mass(step));
  }
  const bool ok = row_err <= kRowTol && goal_value == 0.0 && mass_rise <= kMassTol && max_reward <= 0.0;
  return {ok, fmt("%d instances: row error %.2g, |V(goal)| %.2g, mass rise %.2g, max reward %.3g", kStructInstances,
                  row_err, goal_value, mass_rise, max_reward)};
}

// 4. Training on synthetic demos recovers a forecaster that beats the
//    random-walk baseline and approaches the ground truth's likelihood.
Outcome irl_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridMap map = parse_map(canonical_map_text());
  const Mdp mdp(map);
  const StateFeatures sf = state_features(features(map), mdp);
  const RewardModel truth = parse_reward_spec(read_file(data_path("ground_truth.reward")), features(map));

  DemoConfig dc;
  dc.count = kTrainDemos + kHeldOutDemos;
  dc.seed = 1;
  const auto demos = generate_demos(map, truth, dc);
  const std::vector<Trajectory> train_set(demos.begin(), demos.begin() + kTrainDemos);
  const std::vector<Trajectory> held_out(demos.begin() + kTrainDemos, demos.end());

  const TrainResult trained = train(train_set, map, TrainConfig{});
  const int N = kDefaultHorizon;
  const double ll_model = mean_log_likelihood(trained.model, held_out, mdp, sf, N);
  const double ll_truth = mean_log_likelihood(truth, held_out, mdp, sf, N);
  const double gap = std::abs(ll_model - ll_truth) / std::abs(ll_truth);

  const auto examples = make_examples(held_out, mdp);
  EvalConfig cfg;
  cfg.ks = {5};
  const MetricsTable model = evaluate(examples, GoalPolicies(map, mdp, reward_field(trained.model, sf), N), mdp, cfg);
  const MetricsTable base = evaluate(examples, GoalPolicies::uniform(map, mdp, N), mdp, cfg);
  const double ade = model.value("MinADE", 5);
  const double fde = model.value("MinFDE", 5);
  const double ade_b = base.value("MinADE", 5);
  const double fde_b = base.value("MinFDE", 5);
  const double t = seconds_since(t0);
  const bool ok = ade <= (1 - kBaselineGain) * ade_b && fde <= (1 - kBaselineGain) * fde_b && gap <= kLikelihoodGap &&
                  t < kRecoveryBudgetSec;
  return {ok, fmt("MinADE5 %.3f vs baseline %.3f, MinFDE5 %.3f vs %.3f, held-out LL %.4f vs truth %.4f (gap %.2f%%), "
                  "%.1f s",
                  ade, ade_b, fde, fde_b, ll_model, ll_truth, 100 * gap, t)};
}

// 5. Displacement metrics on hand cases, and MinADE over the K heaviest
//    paths never grows with K.
Outcome metric_exactness() {
  bool exact = true;
  auto set_of = [](std::vector<PointPath> paths) {
    ForecastSet fs;
    fs.k = static_cast<int>(paths.size());
    fs.weights.assign(paths.size(), 1.0 / static_cast<double>(paths.size()));
    fs.paths = std::move(paths);
    return fs;
  };
  const PointPath truth{{0, 0}, {1, 0}, {2, 0}};
  // zero
  exact &= min_ade(set_of({truth}), truth) == 0.0 && min_fde(set_of({truth}), truth) == 0.0;
  // constant offset of 2 columns
  const PointPath shifted{{0, 2}, {1, 2}, {2, 2}};
  exact &= min_ade(set_of({shifted}), truth) == 2.0 && min_fde(set_of({shifted}), truth) == 2.0;
  // 3-4-5 final offset
  const PointPath end_off{{0, 0}, {1, 0}, {5, 4}};
  exact &= min_fde(set_of({end_off}), truth) == 5.0 && min_ade(set_of({end_off}), truth) == 5.0 / 3.0;
  // min over K picks the best path regardless of order
  exact &= min_ade(set_of({shifted, end_off, truth}), truth) == 0.0;
  exact &= min_fde(set_of({shifted, end_off}), truth) == 2.0;
  exact &= min_ade(set_of({shifted, end_off}), truth) == 5.0 / 3.0;

  std::mt19937_64 gen(99);
  std::normal_distribution<double> n(0.0, 3.0);
  int violations = 0;
  for (int i = 0; i < kMetricSets; ++i) {
    const int L = 2 + static_cast<int>(gen() % 19);
    const int K = 1 + static_cast<int>(gen() % 20);
    auto random_path = [&] {
      PointPath p;
      for (int j = 0; j < L; ++j) p.push_back({n(gen), n(gen)});
      return p;
    };
    const PointPath t = random_path();
    std::vector<PointPath> all;
    for (int k = 0; k < K; ++k) all.push_back(random_path());
    double prev = INFINITY;
    for (int k = 1; k <= K; ++k) {
      const double v = min_ade(set_of(std::vector<PointPath>(all.begin(), all.begin() + k)), t);
      if (v > prev) ++violations;
      prev = v;
    }
  }
  return {exact && violations == 0,
          fmt("hand cases %s, %d random sets with %d monotonicity violations", exact ? "exact" : "MISMATCH",
              kMetricSets, violations)};
}

// 6. Two-resident scenario: golden log plus the story it must tell.
Outcome pipeline_golden() {
  const GridMap map = parse_map(canonical_map_text());
  const Mdp mdp(map);
  const auto profiles = profile_store_load(data_path("profiles.json"));
  const Scenario s = load_scenario(data_path("scenarios/two_residents.json"));
  const ScenarioResult a = run_scenario(s, map, mdp, profiles, {}, s.seed);
  const ScenarioResult b = run_scenario(s, map, mdp, profiles, {}, s.seed);
  const std::string log = format_log(a.log);
  const bool stable = log == format_log(b.log) && log == read_file(fixture_path("two_residents.events.log"));

  const LightSetting a_colour = find_profile(profiles, "A")->lighting;
  const std::string a_detail = fmt("profile %d %d %d %d", a_colour.red, a_colour.green, a_colour.blue,
                                   a_colour.intensity);
  const Tick b_entry = s.residents[1].entry_tick;
  Tick first_default = -1;
  Tick first_profile = -1;
  bool b_entry_quiet = true;
  bool off_after_timeout = false;
  Tick last_drop = -1;
  for (const LogRecord& r : a.log) {
    if (r.kind == "DROP") last_drop = r.tick;
    if (r.kind != "SET" && r.kind != "OFF") continue;
    if (r.kind == "SET" && r.detail.rfind("default", 0) == 0 && first_default < 0) first_default = r.tick;
    if (r.kind == "SET" && r.person == "A" && r.detail == a_detail && first_profile < 0) first_profile = r.tick;
    // one detect + recognize cycle after B's PIR, plus a frame
    if (r.tick >= b_entry && r.tick <= b_entry + 2 * s.config.frame_interval + 45 + 58) b_entry_quiet = false;
    if (r.kind == "OFF" && last_drop >= 0 && r.tick >= last_drop + s.config.zone_timeout) off_after_timeout = true;
  }
  const bool story = first_default >= 0 && first_profile > first_default && b_entry_quiet && off_after_timeout &&
                     a.commands.size() > 0 && a.commands.back().kind() == LightingCommand::Kind::Off;

  // A enters at tick 0; frames at the PIR tick run first, so the first
  // frame that sees the track is the next one.
  const Tick interval = s.config.frame_interval;
  const Tick entry = s.residents[0].entry_tick;
  const Tick expected = (entry / interval + 1) * interval - entry + s.oracles.latency.detect +
                        s.oracles.latency.recognize;
  const bool latency = !a.episodes.empty() && a.episodes[0].latency() == expected;
  return {stable && story && latency,
          fmt("golden %s, story %s, A latency %lld ms (expected %lld)", stable ? "match" : "DIFF",
              story ? "ok" : "BROKEN", a.episodes.empty() || !a.episodes[0].latency()
                                           ? -1LL
                                           : static_cast<long long>(*a.episodes[0].latency()),
              static_cast<long long>(expected))};
}

// 7. Codec bijectivity, server conformance, and scenario commands reaching
//    the lamp simulator unchanged.
Outcome protocol_bit_exact() {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> pct(0, 100);
  std::uniform_int_distribution<int> glyph(33, 126);
  int codec_bad = 0;
  for (int i = 0; i < kCodecCommands; ++i) {
    std::string zone;
    for (int n = 1 + static_cast<int>(gen() % 16); n > 0; --n) zone += static_cast<char>(glyph(gen));
    const LightingCommand c = gen() % 4 == 0 ? LightingCommand::off(zone)
                                             : LightingCommand::set(zone, byte(gen), byte(gen), byte(gen), pct(gen));
    const std::string line = encode(c);
    if (!(decode(line) == c) || encode(decode(line)) != line) ++codec_bad;
  }

  LampServer server({"127.0.0.1", 0});
  const std::pair<const char*, const char*> script[] = {
      {"GET hall", "STATE hall OFF"},
      {"SET hall 10 20 30 40", "OK"},
      {"GET hall", "STATE hall 10 20 30 40"},
      {"SET hall 10 20 30", "ERR parse"},
      {"SET hall 10 20 30 101", "ERR range"},
      {"SET hall 1 2 3 4 5", "ERR parse"},
      {"PING", "ERR parse"},
      {"OFF hall", "OK"},
      {"GET hall", "STATE hall OFF"},
  };
  int conformance_bad = 0;
  {
    LampClient client({"127.0.0.1", server.port()});
    for (const auto& [req, want] : script)
      if (client.request(req) != want) ++conformance_bad;
  }

  const GridMap map = parse_map(canonical_map_text());
  const Mdp mdp(map);
  const auto profiles = profile_store_load(data_path("profiles.json"));
  int scenarios = 0;
  int mismatched = 0;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(data_path("scenarios")))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    LampServer lamp({"127.0.0.1", 0});
    LampClient client({"127.0.0.1", lamp.port()});
    const Scenario s = load_scenario(f.string());
    const ScenarioResult res =
        run_scenario(s, map, mdp, profiles, {}, s.seed, [&](const LightingCommand& c) { client.send(c); });
    std::string logged;
    for (const LogRecord& r : res.log) {
      if (r.kind == "SET") {
        const LightSetting l = lighting_of_detail(r.detail);
        logged += encode(LightingCommand::set(r.zone, l));
      } else if (r.kind == "OFF") {
        logged += encode(LightingCommand::off(r.zone));
      }
    }
    std::string observed;
    for (const LightingCommand& c : lamp.journal()) observed += encode(c);
    ++scenarios;
    if (observed != logged || res.commands != lamp.journal()) ++mismatched;
  }
  return {codec_bad == 0 && conformance_bad == 0 && mismatched == 0 && scenarios > 0,
          fmt("%d/%d codec round trips, %d/%zu server replies, %d/%d scenarios matched", kCodecCommands - codec_bad,
              kCodecCommands, static_cast<int>(std::size(script)) - conformance_bad, std::size(script),
              scenarios - mismatched, scenarios)};
}

// 8. Empirical path frequencies from the sampler vs enumerated
//    probabilities.
Outcome sampling_consistency() {
  const Mdp mdp(parse_map(kOpenRoom3));
  std::mt19937_64 gen(8);
  const auto r = nonpositive_field(gen, 9);
  const StateId start = 0;
  const StateId goal = 5;  // (2,3): three moves away
  const int N = 5;
  const Policy pi = value_iteration(r, GoalSpec{goal}, N, mdp);
  const PathDistribution dist = enumerate_paths(r, start, GoalSpec{goal}, N, mdp);
  std::map<std::vector<Action>, int> counts;
  int unabsorbed = 0;
  for (const Trajectory& t : sample_paths(pi, start, GoalSpec{goal}, kSamplingDraws, 12345, mdp)) {
    if (t.last() != goal)
      ++unabsorbed;
    else
      ++counts[t.actions];
  }
  int outside = 0;
  double worst_z = 0.0;
  for (const EnumeratedPath& p : dist.paths) {
    const double freq = static_cast<double>(counts[p.actions]) / kSamplingDraws;
    const double se = std::sqrt(p.probability * (1 - p.probability) / kSamplingDraws);
    const double z = se > 0 ? std::abs(freq - p.probability) / se : 0.0;
    worst_z = std::max(worst_z, z);
    if (z > kSamplingSe) ++outside;
  }
  // any sampled path missing from the enumeration is an error
  std::size_t unknown = 0;
  for (const auto& [acts, c] : counts) {
    bool found = false;
    for (const EnumeratedPath& p : dist.paths) found = found || p.actions == acts;
    if (!found) ++unknown;
  }
  return {outside == 0 && unknown == 0 && unabsorbed == 0,
          fmt("%zu paths, %d draws, worst deviation %.2f SE (limit %.0f), %zu unknown, %d unabsorbed",
              dist.paths.size(), kSamplingDraws, worst_z, kSamplingSe, unknown, unabsorbed)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 oracle-equivalence", oracle_equivalence},    {"2 gradient-correctness", gradient_correctness},
      {"3 structural-invariants", structural_invariants}, {"4 irl-recovery", irl_recovery},
      {"5 metric-exactness", metric_exactness},        {"6 pipeline-golden-log", pipeline_golden},
      {"7 protocol-bit-exactness", protocol_bit_exact}, {"8 sampling-consistency", sampling_consistency},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
