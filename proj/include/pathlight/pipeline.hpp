#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pathlight/forecast.hpp"
#include "pathlight/gridmap.hpp"
#include "pathlight/lampnet.hpp"
#include "pathlight/mdp.hpp"
#include "pathlight/profiles.hpp"
#include "pathlight/random.hpp"

namespace pathlight {

using Tick = std::int64_t;  // simulated milliseconds

class PipelineError : public std::runtime_error {
 public:
  enum class Kind { StaleEvent, UnknownZone, ScenarioReferencesUnknownProfile, MalformedScenario };
  PipelineError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct StageLatency {
  Tick detect = 45;
  Tick recognize = 58;
  Tick track = 17;
  Tick forecast = 79;
};

struct Oracles {
  double p_detect = 0.95;
  double noise_sigma = 0.5;  // cells
  double p_correct_id = 0.9512;
  StageLatency latency;
};

struct ControllerConfig {
  Tick frame_interval = 42;
  Tick zone_timeout = 1500;  // empty zone to OFF
  Tick lost_timeout = 600;   // Lost/Detecting track to DROP
  int forecast_stride = 12;  // tracked frames between forecasts
  double preempt_threshold = 0.6;
  LightSetting default_lighting{255, 255, 255, 60};
};

enum class TrackStatus { Sensing, Detecting, Identifying, Tracking, Lost };
const char* status_name(TrackStatus s);
// Edges of the control-flow graph; Lost re-enters through Identifying.
bool transition_allowed(TrackStatus from, TrackStatus to);

inline constexpr const char* kUnknownPerson = "unknown";

struct Track {
  int id = 0;
  int subject = 0;  // hidden ground-truth association
  TrackStatus status = TrackStatus::Sensing;
  std::optional<std::string> person;  // set once identified; "unknown" for strangers
  Cell cell;
  int zone = 0;
  std::optional<int> pending_zone;  // zone seen once, awaiting confirmation
  Tick since = 0;                   // tick of the last status change
  Tick recognized_at = -1;
  int tracked_frames = 0;
  ObservedHistory history;
  Tick entry_pir = -1;  // PIR tick that created the track
  bool episode_open = false;

  bool known() const { return person && *person != kUnknownPerson; }
};

enum class LightMode { Off, Default, Profile, Preemptive };
const char* mode_name(LightMode m);

struct ZoneLighting {
  LightMode mode = LightMode::Off;
  std::optional<std::string> owner;
  Tick empty_since = 0;
  bool empty = true;
};

struct Occupant {
  int subject;
  Cell cell;
};

struct PirTriggered {
  Tick tick;
  int zone;
  int subject;  // who tripped it; used only for oracle association
};

struct Frame {
  Tick tick;
  std::vector<Occupant> occupants;  // ground truth
};

struct TickEvent {
  Tick tick;
};

using Event = std::variant<PirTriggered, Frame, TickEvent>;
Tick event_tick(const Event& e);

struct LogRecord {
  Tick tick;
  std::string kind;  // PIR DETECT IDENTIFY LOST DROP FORECAST SET OFF
  std::string zone;
  std::string person;
  std::string detail;
};

std::string format_log_record(const LogRecord& r);
std::string format_log(const std::vector<LogRecord>& log);

struct Episode {
  std::string person;
  int subject;
  Tick entry;
  std::optional<Tick> applied;  // first profile SET caused by identification
  bool withheld = false;        // zone held by another present owner

  std::optional<Tick> latency() const {
    return applied ? std::optional<Tick>(*applied - entry) : std::nullopt;
  }
};

struct ForecastOutcome {
  int zone;          // zone of the heaviest forecast path's final point
  double posterior;  // goal weight of that zone
};

using Forecaster = std::function<std::optional<ForecastOutcome>(const ObservedHistory&)>;

/// MaxEnt goal inference plus clustered sampling for one map and reward.
class MaxEntForecaster {
 public:
  MaxEntForecaster(const GridMap& map, const Mdp& mdp, std::span<const double> reward, int horizon,
                   int samples = 50, int k = 5, std::uint64_t seed = 1);
  std::optional<ForecastOutcome> operator()(const ObservedHistory& history) const;

 private:
  const GridMap* map_;
  const Mdp* mdp_;
  GoalPolicies policies_;
  int samples_;
  int k_;
  std::uint64_t seed_;
};

/// Deterministic event-driven controller. Feeds events in tick order;
/// returns the lighting commands each event caused, in log order.
class Controller {
 public:
  Controller(const GridMap& map, const Mdp& mdp, std::vector<ResidentProfile> profiles,
             std::map<int, std::optional<std::string>> subject_profiles, ControllerConfig config, Oracles oracles,
             Forecaster forecaster, std::uint64_t seed);

  std::vector<LightingCommand> process(const Event& event);

  const std::vector<LogRecord>& log() const { return log_; }
  const std::vector<Episode>& episodes() const { return episodes_; }
  const std::vector<ZoneLighting>& zones() const { return zones_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  Tick now() const { return now_; }
  std::size_t dropped_frames() const { return dropped_frames_; }

 private:
  struct Pending {
    enum class What { Detected, Identified, Tracked, Lost, Forecast };
    Tick due;
    std::uint64_t order;
    What what;
    int track;
    Cell cell;
    std::string person;
  };

  void flush(Tick upto, std::vector<LightingCommand>& out);
  void maintain(Tick t, std::vector<LightingCommand>& out);
  void on_pir(const PirTriggered& e, std::vector<LightingCommand>& out);
  void on_frame(const Frame& f);
  void apply(const Pending& p, std::vector<LightingCommand>& out);

  void set_status(Track& t, TrackStatus to, Tick tick);
  void record(Tick tick, const char* kind, int zone, const std::string& person, const std::string& detail);
  void command_set(Tick tick, int zone, LightMode mode, const std::optional<std::string>& owner,
                   const LightSetting& s, const char* reason, std::vector<LightingCommand>& out);
  void command_off(Tick tick, int zone, std::vector<LightingCommand>& out);
  enum class Claim { Applied, AlreadyLit, Withheld };
  Claim claim_zone(Track& t, Tick tick, std::vector<LightingCommand>& out);
  void release_owner(int zone, Tick tick, std::vector<LightingCommand>& out);
  bool owner_present(int zone, const std::string& owner) const;
  bool zone_occupied(int zone) const;
  Track* find_track(int id);
  Cell observe(Cell truth);
  std::string recognize(int subject);
  void extend_history(Track& t, Cell to);
  const LightSetting& lighting_of(const std::string& person) const;

  const GridMap* map_;
  const Mdp* mdp_;
  std::vector<ResidentProfile> profiles_;
  std::map<int, std::optional<std::string>> subject_profiles_;
  ControllerConfig config_;
  Oracles oracles_;
  Forecaster forecaster_;
  Rng rng_;

  Tick now_ = 0;
  Tick busy_until_ = 0;
  int next_track_id_ = 1;
  std::uint64_t next_order_ = 0;
  std::size_t dropped_frames_ = 0;
  std::vector<Track> tracks_;
  std::vector<ZoneLighting> zones_;
  std::vector<Pending> pending_;
  std::vector<LogRecord> log_;
  std::vector<Episode> episodes_;
};

}  // namespace pathlight
