#include "pathlight/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "pathlight/fileio.hpp"

namespace pathlight {

namespace {

using Json = nlohmann::json;

PipelineError bad(const std::string& what) { return PipelineError(PipelineError::Kind::MalformedScenario, what); }

void only_keys(const Json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw bad(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* allowed) { return k == allowed; }))
      throw bad(where + ": unknown field \"" + k + "\"");
  }
}

Tick get_tick(const Json& obj, const char* key, Tick fallback, Tick lo, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj[key];
  if (!v.is_number_integer() || v.get<Tick>() < lo)
    throw bad(where + "." + key + " must be an integer >= " + std::to_string(lo));
  return v.get<Tick>();
}

double get_prob(const Json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj[key];
  if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0)
    throw bad(where + "." + key + " must be a number in [0, 1]");
  return v.get<double>();
}

int get_channel(const Json& obj, const char* key, int hi, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) throw bad(where + "." + key + " must be an integer");
  const long long v = obj[key].get<long long>();
  if (v < 0 || v > hi) throw bad(where + "." + key + " out of range");
  return static_cast<int>(v);
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw bad(std::string("invalid JSON: ") + e.what());
  }
  only_keys(doc,
            {"name", "seed", "frame_interval", "end_tick", "zone_timeout", "lost_timeout", "forecast_stride",
             "preempt_threshold", "default_lighting", "oracles", "residents"},
            "scenario");
  Scenario sc;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw bad("scenario.name must be a string");
    sc.name = doc["name"].get<std::string>();
  }
  sc.seed = static_cast<std::uint64_t>(get_tick(doc, "seed", 1, 0, "scenario"));
  ControllerConfig& cfg = sc.config;
  cfg.frame_interval = get_tick(doc, "frame_interval", cfg.frame_interval, 1, "scenario");
  if (doc.contains("end_tick")) sc.end_tick = get_tick(doc, "end_tick", 0, 0, "scenario");
  cfg.zone_timeout = get_tick(doc, "zone_timeout", cfg.zone_timeout, 0, "scenario");
  cfg.lost_timeout = get_tick(doc, "lost_timeout", cfg.lost_timeout, 0, "scenario");
  cfg.forecast_stride = static_cast<int>(get_tick(doc, "forecast_stride", cfg.forecast_stride, 0, "scenario"));
  cfg.preempt_threshold = get_prob(doc, "preempt_threshold", cfg.preempt_threshold, "scenario");
  if (doc.contains("default_lighting")) {
    const Json& l = doc["default_lighting"];
    only_keys(l, {"red", "green", "blue", "intensity"}, "default_lighting");
    cfg.default_lighting = {get_channel(l, "red", 255, "default_lighting"),
                            get_channel(l, "green", 255, "default_lighting"),
                            get_channel(l, "blue", 255, "default_lighting"),
                            get_channel(l, "intensity", 100, "default_lighting")};
  }
  if (doc.contains("oracles")) {
    const Json& o = doc["oracles"];
    only_keys(o, {"p_detect", "noise_sigma", "p_correct_id", "latency"}, "oracles");
    sc.oracles.p_detect = get_prob(o, "p_detect", sc.oracles.p_detect, "oracles");
    sc.oracles.p_correct_id = get_prob(o, "p_correct_id", sc.oracles.p_correct_id, "oracles");
    if (o.contains("noise_sigma")) {
      if (!o["noise_sigma"].is_number() || o["noise_sigma"].get<double>() < 0.0)
        throw bad("oracles.noise_sigma must be a number >= 0");
      sc.oracles.noise_sigma = o["noise_sigma"].get<double>();
    }
    if (o.contains("latency")) {
      const Json& l = o["latency"];
      only_keys(l, {"detect", "recognize", "track", "forecast"}, "oracles.latency");
      StageLatency& lat = sc.oracles.latency;
      lat.detect = get_tick(l, "detect", lat.detect, 0, "oracles.latency");
      lat.recognize = get_tick(l, "recognize", lat.recognize, 0, "oracles.latency");
      lat.track = get_tick(l, "track", lat.track, 0, "oracles.latency");
      lat.forecast = get_tick(l, "forecast", lat.forecast, 0, "oracles.latency");
    }
  }
  if (!doc.contains("residents") || !doc["residents"].is_array()) throw bad("scenario.residents must be an array");
  for (std::size_t i = 0; i < doc["residents"].size(); ++i) {
    const Json& r = doc["residents"][i];
    const std::string where = "residents[" + std::to_string(i) + "]";
    only_keys(r, {"profile", "entry_tick", "step_ticks", "waypoints", "exit"}, where);
    ResidentScript rs;
    if (!r.contains("profile")) throw bad(where + ".profile is required (null for a guest)");
    if (r["profile"].is_string())
      rs.profile = r["profile"].get<std::string>();
    else if (!r["profile"].is_null())
      throw bad(where + ".profile must be a string or null");
    rs.entry_tick = get_tick(r, "entry_tick", 0, 0, where);
    rs.step_ticks = get_tick(r, "step_ticks", rs.step_ticks, 1, where);
    if (r.contains("exit")) {
      if (!r["exit"].is_boolean()) throw bad(where + ".exit must be a boolean");
      rs.exit = r["exit"].get<bool>();
    }
    if (!r.contains("waypoints") || !r["waypoints"].is_array() || r["waypoints"].empty())
      throw bad(where + ".waypoints must be a non-empty array");
    for (const Json& w : r["waypoints"]) {
      if (!w.is_array() || (w.size() != 2 && w.size() != 3) ||
          !std::all_of(w.begin(), w.end(), [](const Json& x) { return x.is_number_integer(); }))
        throw bad(where + ": waypoint must be [row, col] or [row, col, dwell]");
      Waypoint wp{{w[0].get<int>(), w[1].get<int>()}, w.size() == 3 ? w[2].get<Tick>() : 0};
      if (wp.dwell < 0) throw bad(where + ": negative dwell");
      rs.waypoints.push_back(wp);
    }
    sc.residents.push_back(std::move(rs));
  }
  return sc;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::optional<Cell> SubjectTimeline::at(Tick t) const {
  if (moves.empty() || t < moves.front().first) return std::nullopt;
  if (leave && t >= *leave) return std::nullopt;
  auto it = std::upper_bound(moves.begin(), moves.end(), t,
                             [](Tick x, const std::pair<Tick, Cell>& m) { return x < m.first; });
  return std::prev(it)->second;
}

std::vector<SubjectTimeline> expand_scenario(const Scenario& scenario, const GridMap& map) {
  std::vector<SubjectTimeline> out;
  for (std::size_t i = 0; i < scenario.residents.size(); ++i) {
    const ResidentScript& r = scenario.residents[i];
    const std::string where = "residents[" + std::to_string(i) + "]";
    SubjectTimeline tl;
    Tick t = r.entry_tick;
    for (std::size_t w = 0; w < r.waypoints.size(); ++w) {
      const Cell target = r.waypoints[w].cell;
      if (!map.passable(target))
        throw bad(where + ": waypoint (" + std::to_string(target.row) + "," + std::to_string(target.col) +
                  ") is not a free cell");
      if (w == 0) {
        tl.moves.push_back({t, target});
      } else {
        Cell c = tl.moves.back().second;
        if (c.row != target.row && c.col != target.col) throw bad(where + ": waypoints must share a row or column");
        while (c != target) {
          c.row += (target.row > c.row) - (target.row < c.row);
          c.col += (target.col > c.col) - (target.col < c.col);
          if (!map.passable(c)) throw bad(where + ": path crosses a wall");
          t += r.step_ticks;
          tl.moves.push_back({t, c});
        }
      }
      t += r.waypoints[w].dwell;
    }
    if (r.exit) tl.leave = t + r.step_ticks;
    out.push_back(std::move(tl));
  }
  return out;
}

Tick scenario_end(const Scenario& scenario, const std::vector<SubjectTimeline>& timelines) {
  if (scenario.end_tick) return *scenario.end_tick;
  Tick last = 0;
  for (const SubjectTimeline& tl : timelines) last = std::max(last, tl.leave.value_or(tl.moves.back().first));
  return last + scenario.config.lost_timeout + scenario.config.zone_timeout + 2000;
}

std::vector<Event> scenario_events(const Scenario& scenario, const GridMap& map,
                                   const std::vector<SubjectTimeline>& timelines) {
  struct Keyed {
    Tick tick;
    int rank;
    std::size_t seq;
    Event event;
  };
  std::vector<Keyed> keyed;
  const Tick end = scenario_end(scenario, timelines);
  for (Tick t = 0; t <= end; t += scenario.config.frame_interval) {
    Frame f{t, {}};
    for (std::size_t s = 0; s < timelines.size(); ++s)
      if (const auto c = timelines[s].at(t)) f.occupants.push_back({static_cast<int>(s), *c});
    keyed.push_back({t, 0, keyed.size(), std::move(f)});
  }
  for (std::size_t s = 0; s < timelines.size(); ++s) {
    std::optional<int> zone;
    for (const auto& [t, c] : timelines[s].moves) {
      const int z = *map.zone_of(c);
      if (zone != z && t <= end) keyed.push_back({t, 1, keyed.size(), PirTriggered{t, z, static_cast<int>(s)}});
      zone = z;
    }
  }
  keyed.push_back({end, 2, keyed.size(), TickEvent{end}});
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.seq < b.seq;
  });
  std::vector<Event> out;
  out.reserve(keyed.size());
  for (Keyed& k : keyed) out.push_back(std::move(k.event));
  return out;
}

ScenarioResult run_scenario(const Scenario& scenario, const GridMap& map, const Mdp& mdp,
                            const std::vector<ResidentProfile>& profiles, Forecaster forecaster, std::uint64_t seed,
                            const CommandSink& sink) {
  std::map<int, std::optional<std::string>> subjects;
  for (std::size_t i = 0; i < scenario.residents.size(); ++i) {
    const auto& p = scenario.residents[i].profile;
    if (p && !find_profile(profiles, *p))
      throw PipelineError(PipelineError::Kind::ScenarioReferencesUnknownProfile,
                          "residents[" + std::to_string(i) + "] references unknown profile " + *p);
    subjects[static_cast<int>(i)] = p;
  }
  const auto timelines = expand_scenario(scenario, map);
  const auto events = scenario_events(scenario, map, timelines);

  Controller controller(map, mdp, profiles, subjects, scenario.config, scenario.oracles, std::move(forecaster), seed);
  ScenarioResult result;
  for (const Event& e : events)
    for (const LightingCommand& cmd : controller.process(e)) {
      if (sink) sink(cmd);
      result.commands.push_back(cmd);
    }
  result.log = controller.log();
  result.episodes = controller.episodes();
  result.dropped_frames = controller.dropped_frames();
  result.end_tick = scenario_end(scenario, timelines);

  LatencyReport& lr = result.latency;
  double sum = 0.0;
  for (const Episode& ep : result.episodes) {
    ++lr.entries;
    if (ep.withheld) ++lr.withheld;
    if (const auto l = ep.latency()) {
      ++lr.applied;
      sum += static_cast<double>(*l);
      lr.max = std::max(lr.max, *l);
    }
  }
  lr.mean = lr.applied ? sum / static_cast<double>(lr.applied) : 0.0;
  return result;
}

std::string format_latency_report(const ScenarioResult& result) {
  std::string out = "person,entry_tick,applied_tick,latency_ms\n";
  for (const Episode& ep : result.episodes) {
    out += ep.person + "," + std::to_string(ep.entry) + ",";
    if (ep.applied)
      out += std::to_string(*ep.applied) + "," + std::to_string(*ep.latency()) + "\n";
    else
      out += std::string("-,") + (ep.withheld ? "withheld" : "none") + "\n";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", result.latency.mean);
  out += std::string("mean_ms,") + buf + "\n";
  out += "max_ms," + std::to_string(result.latency.max) + "\n";
  out += "withheld," + std::to_string(result.latency.withheld) + "\n";
  out += "dropped_frames," + std::to_string(result.dropped_frames) + "\n";
  return out;
}

}  // namespace pathlight
