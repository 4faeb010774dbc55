#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathlight/pipeline.hpp"

namespace pathlight {

struct Waypoint {
  Cell cell;
  Tick dwell = 0;  // extra ticks spent standing on this waypoint
};

struct ResidentScript {
  std::optional<std::string> profile;  // nullopt: unenrolled guest
  Tick entry_tick = 0;
  Tick step_ticks = 250;  // ticks per cell moved
  std::vector<Waypoint> waypoints;
  bool exit = true;  // leaves the house after the last waypoint
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  std::optional<Tick> end_tick;
  ControllerConfig config;
  Oracles oracles;
  std::vector<ResidentScript> residents;
};

/// JSON scenario. Top level: name, seed, frame_interval, end_tick,
/// zone_timeout, lost_timeout, forecast_stride, preempt_threshold,
/// default_lighting {red, green, blue, intensity}, oracles {p_detect,
/// noise_sigma, p_correct_id, latency {detect, recognize, track, forecast}},
/// residents [{profile, entry_tick, step_ticks, waypoints [[r, c] or
/// [r, c, dwell]], exit}]. Only residents is required.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Cell-by-cell ground truth for one resident. Consecutive waypoints must
/// share a row or a column.
struct SubjectTimeline {
  std::vector<std::pair<Tick, Cell>> moves;  // first entry is the entry
  std::optional<Tick> leave;                 // absent from this tick on

  std::optional<Cell> at(Tick t) const;
};

std::vector<SubjectTimeline> expand_scenario(const Scenario& scenario, const GridMap& map);
Tick scenario_end(const Scenario& scenario, const std::vector<SubjectTimeline>& timelines);

/// Frames on the frame grid, PIR triggers on every zone entry, and a final
/// Tick. Frames sort before PIR events at equal ticks.
std::vector<Event> scenario_events(const Scenario& scenario, const GridMap& map,
                                   const std::vector<SubjectTimeline>& timelines);

struct LatencyReport {
  std::size_t entries = 0;
  std::size_t applied = 0;
  std::size_t withheld = 0;
  double mean = 0.0;  // over applied entries
  Tick max = 0;
};

struct ScenarioResult {
  std::vector<LogRecord> log;
  std::vector<LightingCommand> commands;
  std::vector<Episode> episodes;
  LatencyReport latency;
  std::size_t dropped_frames = 0;
  Tick end_tick = 0;
};

using CommandSink = std::function<void(const LightingCommand&)>;

// Throws PipelineError(ScenarioReferencesUnknownProfile) for residents
// whose profile id is not in the store.
ScenarioResult run_scenario(const Scenario& scenario, const GridMap& map, const Mdp& mdp,
                            const std::vector<ResidentProfile>& profiles, Forecaster forecaster, std::uint64_t seed,
                            const CommandSink& sink = {});

std::string format_latency_report(const ScenarioResult& result);

}  // namespace pathlight
