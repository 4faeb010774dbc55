#include "pathlight/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>

#include "pathlight/cluster.hpp"

namespace pathlight {

namespace {

constexpr std::size_t kMaxHistory = 256;

std::string setting_text(const LightSetting& s) {
  return std::to_string(s.red) + " " + std::to_string(s.green) + " " + std::to_string(s.blue) + " " +
         std::to_string(s.intensity);
}

// Shortest 4-connected path from a to b, excluding a.
std::vector<StateId> bfs_path(const Mdp& mdp, StateId a, StateId b) {
  if (a == b) return {};
  std::vector<StateId> parent(static_cast<std::size_t>(mdp.state_count()), -1);
  std::deque<StateId> queue{a};
  parent[static_cast<std::size_t>(a)] = a;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    if (s == b) break;
    for (StateId t : mdp.successors(s)) {
      if (parent[static_cast<std::size_t>(t)] != -1) continue;
      parent[static_cast<std::size_t>(t)] = s;
      queue.push_back(t);
    }
  }
  std::vector<StateId> path;
  for (StateId s = b; s != a; s = parent[static_cast<std::size_t>(s)]) path.push_back(s);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

const char* status_name(TrackStatus s) {
  switch (s) {
    case TrackStatus::Sensing:
      return "sensing";
    case TrackStatus::Detecting:
      return "detecting";
    case TrackStatus::Identifying:
      return "identifying";
    case TrackStatus::Tracking:
      return "tracking";
    case TrackStatus::Lost:
      return "lost";
  }
  return "?";
}

bool transition_allowed(TrackStatus from, TrackStatus to) {
  using S = TrackStatus;
  return (from == S::Sensing && to == S::Detecting) || (from == S::Detecting && to == S::Identifying) ||
         (from == S::Identifying && to == S::Tracking) || (from == S::Tracking && to == S::Lost) ||
         (from == S::Lost && to == S::Identifying);
}

const char* mode_name(LightMode m) {
  switch (m) {
    case LightMode::Off:
      return "off";
    case LightMode::Default:
      return "default";
    case LightMode::Profile:
      return "profile";
    case LightMode::Preemptive:
      return "preemptive";
  }
  return "?";
}

Tick event_tick(const Event& e) {
  return std::visit([](const auto& ev) { return ev.tick; }, e);
}

std::string format_log_record(const LogRecord& r) {
  return std::to_string(r.tick) + "," + r.kind + "," + r.zone + "," + r.person + "," + r.detail;
}

std::string format_log(const std::vector<LogRecord>& log) {
  std::string out;
  for (const LogRecord& r : log) out += format_log_record(r) + "\n";
  return out;
}

MaxEntForecaster::MaxEntForecaster(const GridMap& map, const Mdp& mdp, std::span<const double> reward, int horizon,
                                   int samples, int k, std::uint64_t seed)
    : map_(&map), mdp_(&mdp), policies_(map, mdp, reward, horizon), samples_(samples), k_(k), seed_(seed) {}

std::optional<ForecastOutcome> MaxEntForecaster::operator()(const ObservedHistory& history) const {
  if (history.cells.size() < 2) return std::nullopt;
  const GoalPosterior post = infer_goals(history, policies_, *mdp_);
  const std::uint64_t seed = seed_ + 7919ull * static_cast<std::uint64_t>(history.person) + history.cells.size();
  const SampleSet samples = sample_goal_mixture(history, post, policies_, *mdp_, samples_, kDefaultResamplePoints, seed);
  const int k = std::min<int>(k_, static_cast<int>(samples.paths.size()));
  if (k < 1) return std::nullopt;
  const ForecastSet fs = cluster_paths(samples.paths, samples.weights, k, seed);
  const Point end = fs.paths.front().back();
  const Cell c{static_cast<int>(std::lround(end.row)), static_cast<int>(std::lround(end.col))};
  const auto zone = map_->zone_of(c);
  if (!zone) return std::nullopt;
  return ForecastOutcome{*zone, post.weight_of_zone(*zone)};
}

Controller::Controller(const GridMap& map, const Mdp& mdp, std::vector<ResidentProfile> profiles,
                       std::map<int, std::optional<std::string>> subject_profiles, ControllerConfig config,
                       Oracles oracles, Forecaster forecaster, std::uint64_t seed)
    : map_(&map),
      mdp_(&mdp),
      profiles_(std::move(profiles)),
      subject_profiles_(std::move(subject_profiles)),
      config_(config),
      oracles_(oracles),
      forecaster_(std::move(forecaster)),
      rng_(seed),
      zones_(map.zones().size()) {}

std::vector<LightingCommand> Controller::process(const Event& event) {
  const Tick t = event_tick(event);
  if (t < now_)
    throw PipelineError(PipelineError::Kind::StaleEvent,
                        "event at tick " + std::to_string(t) + " after tick " + std::to_string(now_));
  std::vector<LightingCommand> out;
  flush(t, out);
  maintain(t, out);
  now_ = t;
  if (const auto* pir = std::get_if<PirTriggered>(&event)) on_pir(*pir, out);
  if (const auto* frame = std::get_if<Frame>(&event)) on_frame(*frame);
  flush(t, out);
  return out;
}

void Controller::flush(Tick upto, std::vector<LightingCommand>& out) {
  std::sort(pending_.begin(), pending_.end(),
            [](const Pending& a, const Pending& b) { return a.due != b.due ? a.due < b.due : a.order < b.order; });
  std::size_t done = 0;
  while (done < pending_.size() && pending_[done].due <= upto) {
    const Pending p = pending_[done++];
    maintain(p.due, out);
    apply(p, out);
    maintain(p.due, out);
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(done));
}

void Controller::maintain(Tick t, std::vector<LightingCommand>& out) {
  for (auto it = tracks_.begin(); it != tracks_.end();) {
    const bool waiting = it->status == TrackStatus::Lost || it->status == TrackStatus::Detecting;
    if (waiting && t - it->since >= config_.lost_timeout) {
      record(t, "DROP", it->zone, it->person.value_or("-"), "track=" + std::to_string(it->id));
      it = tracks_.erase(it);
    } else {
      ++it;
    }
  }
  for (int z = 0; z < static_cast<int>(zones_.size()); ++z) {
    ZoneLighting& zl = zones_[static_cast<std::size_t>(z)];
    const bool occupied = zone_occupied(z);
    if (occupied) {
      zl.empty = false;
    } else if (!zl.empty) {
      zl.empty = true;
      zl.empty_since = t;
    }
    if (zl.mode == LightMode::Profile && !owner_present(z, *zl.owner)) release_owner(z, t, out);
    if (zl.mode == LightMode::Preemptive && owner_present(z, *zl.owner)) zl.mode = LightMode::Profile;
    if (zl.empty && zl.mode != LightMode::Off && t - zl.empty_since >= config_.zone_timeout) command_off(t, z, out);
  }
}

void Controller::on_pir(const PirTriggered& e, std::vector<LightingCommand>& out) {
  if (e.zone < 0 || e.zone >= static_cast<int>(zones_.size()))
    throw PipelineError(PipelineError::Kind::UnknownZone, "PIR for unknown zone " + std::to_string(e.zone));
  record(e.tick, "PIR", e.zone, "-", "-");
  if (zones_[static_cast<std::size_t>(e.zone)].mode == LightMode::Off)
    command_set(e.tick, e.zone, LightMode::Default, std::nullopt, config_.default_lighting, "default", out);
  for (const Track& t : tracks_)
    if (t.subject == e.subject) return;
  Track t;
  t.id = next_track_id_++;
  t.subject = e.subject;
  t.zone = e.zone;
  t.cell = map_->zone(e.zone).anchor;
  t.entry_pir = e.tick;
  t.episode_open = true;
  t.history.person = t.id;
  set_status(t, TrackStatus::Detecting, e.tick);
  tracks_.push_back(std::move(t));
  zones_[static_cast<std::size_t>(e.zone)].empty = false;
}

void Controller::on_frame(const Frame& f) {
  if (f.tick < busy_until_) {
    ++dropped_frames_;
    return;
  }
  auto truth = [&](int subject) -> std::optional<Cell> {
    for (const Occupant& o : f.occupants)
      if (o.subject == subject) return o.cell;
    return std::nullopt;
  };
  auto schedule = [&](Tick due, Pending::What what, const Track& t, Cell cell, std::string person = {}) {
    pending_.push_back({due, next_order_++, what, t.id, cell, std::move(person)});
  };

  Tick cursor = f.tick;
  std::vector<const Track*> to_identify;
  const bool need_detect = std::any_of(tracks_.begin(), tracks_.end(), [](const Track& t) {
    return t.status == TrackStatus::Detecting || t.status == TrackStatus::Lost;
  });
  if (need_detect) {
    cursor += oracles_.latency.detect;
    for (const Track& t : tracks_) {
      if (t.status != TrackStatus::Detecting && t.status != TrackStatus::Lost) continue;
      const auto cell = truth(t.subject);
      if (!cell || !rng_.bernoulli(oracles_.p_detect)) continue;
      schedule(cursor, Pending::What::Detected, t, observe(*cell));
      to_identify.push_back(&t);
    }
  }
  for (const Track& t : tracks_)
    if (t.status == TrackStatus::Identifying) to_identify.push_back(&t);
  if (!to_identify.empty()) {
    cursor += oracles_.latency.recognize;
    for (const Track* t : to_identify) schedule(cursor, Pending::What::Identified, *t, t->cell, recognize(t->subject));
  }

  std::vector<const Track*> to_forecast;
  const bool need_track =
      std::any_of(tracks_.begin(), tracks_.end(), [](const Track& t) { return t.status == TrackStatus::Tracking; });
  if (need_track) {
    cursor += oracles_.latency.track;
    for (const Track& t : tracks_) {
      if (t.status != TrackStatus::Tracking) continue;
      const auto cell = truth(t.subject);
      if (cell && rng_.bernoulli(oracles_.p_detect)) {
        schedule(cursor, Pending::What::Tracked, t, observe(*cell));
        if (forecaster_ && t.known() && config_.forecast_stride > 0 &&
            (t.tracked_frames + 1) % config_.forecast_stride == 0)
          to_forecast.push_back(&t);
      } else {
        schedule(cursor, Pending::What::Lost, t, t.cell);
      }
    }
  }
  for (const Track* t : to_forecast) {
    cursor += oracles_.latency.forecast;
    schedule(cursor, Pending::What::Forecast, *t, t->cell);
  }
  busy_until_ = cursor;
}

void Controller::apply(const Pending& p, std::vector<LightingCommand>& out) {
  Track* t = find_track(p.track);
  if (!t) return;  // dropped meanwhile
  const Tick tick = p.due;
  const std::string id = "track=" + std::to_string(t->id);
  switch (p.what) {
    case Pending::What::Detected: {
      if (t->status != TrackStatus::Detecting && t->status != TrackStatus::Lost) return;
      t->cell = p.cell;
      set_status(*t, TrackStatus::Identifying, tick);
      record(tick, "DETECT", t->zone, t->person.value_or("-"), id);
      return;
    }
    case Pending::What::Identified: {
      if (t->status != TrackStatus::Identifying) return;
      if (t->person != p.person || t->recognized_at < 0) t->recognized_at = tick;
      t->person = p.person;
      set_status(*t, TrackStatus::Tracking, tick);
      t->history.cells = {*mdp_->state_of(t->cell)};
      record(tick, "IDENTIFY", t->zone, p.person, id);
      if (!t->known()) {
        t->episode_open = false;
        if (zones_[static_cast<std::size_t>(t->zone)].mode == LightMode::Off)
          command_set(tick, t->zone, LightMode::Default, std::nullopt, config_.default_lighting, "default", out);
        return;
      }
      const Claim claim = claim_zone(*t, tick, out);
      if (t->episode_open) {
        Episode ep{*t->person, t->subject, t->entry_pir, std::nullopt, false};
        if (claim == Claim::Withheld)
          ep.withheld = true;
        else
          ep.applied = tick;
        episodes_.push_back(ep);
        t->episode_open = false;
      }
      return;
    }
    case Pending::What::Tracked: {
      if (t->status != TrackStatus::Tracking) return;
      ++t->tracked_frames;
      t->cell = p.cell;
      extend_history(*t, p.cell);
      const int seen = *map_->zone_of(p.cell);
      if (seen == t->zone) {
        t->pending_zone.reset();
      } else if (t->pending_zone == seen) {
        t->zone = seen;
        t->pending_zone.reset();
        if (t->known()) claim_zone(*t, tick, out);
        zones_[static_cast<std::size_t>(seen)].empty = false;
      } else {
        t->pending_zone = seen;
      }
      return;
    }
    case Pending::What::Lost: {
      if (t->status != TrackStatus::Tracking) return;
      set_status(*t, TrackStatus::Lost, tick);
      record(tick, "LOST", t->zone, t->person.value_or("-"), id);
      return;
    }
    case Pending::What::Forecast: {
      if (t->status != TrackStatus::Tracking || !t->known()) return;
      const auto outcome = forecaster_(t->history);
      if (!outcome) return;
      char detail[96];
      std::snprintf(detail, sizeof detail, "goal=%s p=%.3f", map_->zone(outcome->zone).name.c_str(),
                    outcome->posterior);
      record(tick, "FORECAST", t->zone, *t->person, detail);
      const ZoneLighting& target = zones_[static_cast<std::size_t>(outcome->zone)];
      if (outcome->zone != t->zone && outcome->posterior >= config_.preempt_threshold &&
          !zone_occupied(outcome->zone) && (target.mode == LightMode::Off || target.mode == LightMode::Default))
        command_set(tick, outcome->zone, LightMode::Preemptive, t->person, lighting_of(*t->person), "preempt", out);
      return;
    }
  }
}

Controller::Claim Controller::claim_zone(Track& t, Tick tick, std::vector<LightingCommand>& out) {
  ZoneLighting& zl = zones_[static_cast<std::size_t>(t.zone)];
  const std::string& me = *t.person;
  if (zl.mode == LightMode::Profile && zl.owner == me) return Claim::AlreadyLit;
  if (zl.mode == LightMode::Profile && owner_present(t.zone, *zl.owner)) return Claim::Withheld;
  if (zl.mode == LightMode::Preemptive && zl.owner == me) {
    zl.mode = LightMode::Profile;
    return Claim::AlreadyLit;
  }
  command_set(tick, t.zone, LightMode::Profile, me, lighting_of(me), "profile", out);
  return Claim::Applied;
}

void Controller::release_owner(int zone, Tick tick, std::vector<LightingCommand>& out) {
  const Track* heir = nullptr;
  bool stranger = false;
  for (const Track& t : tracks_) {
    if (t.zone != zone || t.status != TrackStatus::Tracking) continue;
    if (!t.known()) {
      stranger = true;
      continue;
    }
    if (!heir || t.recognized_at < heir->recognized_at) heir = &t;
  }
  if (heir)
    command_set(tick, zone, LightMode::Profile, heir->person, lighting_of(*heir->person), "transfer", out);
  else if (stranger)
    command_set(tick, zone, LightMode::Default, std::nullopt, config_.default_lighting, "default", out);
  // Otherwise the zone keeps its owner's lighting until the empty timeout.
}

bool Controller::owner_present(int zone, const std::string& owner) const {
  return std::any_of(tracks_.begin(), tracks_.end(), [&](const Track& t) {
    return t.zone == zone && t.person == owner && t.status != TrackStatus::Detecting;
  });
}

bool Controller::zone_occupied(int zone) const {
  return std::any_of(tracks_.begin(), tracks_.end(), [&](const Track& t) { return t.zone == zone; });
}

Track* Controller::find_track(int id) {
  for (Track& t : tracks_)
    if (t.id == id) return &t;
  return nullptr;
}

void Controller::set_status(Track& t, TrackStatus to, Tick tick) {
  if (!transition_allowed(t.status, to))
    throw std::logic_error(std::string("illegal track transition ") + status_name(t.status) + " -> " +
                           status_name(to));
  t.status = to;
  t.since = tick;
}

void Controller::record(Tick tick, const char* kind, int zone, const std::string& person, const std::string& detail) {
  log_.push_back({tick, kind, map_->zone(zone).name, person, detail});
}

void Controller::command_set(Tick tick, int zone, LightMode mode, const std::optional<std::string>& owner,
                             const LightSetting& s, const char* reason, std::vector<LightingCommand>& out) {
  ZoneLighting& zl = zones_[static_cast<std::size_t>(zone)];
  zl.mode = mode;
  zl.owner = owner;
  if (zl.empty) zl.empty_since = tick;
  record(tick, "SET", zone, owner.value_or("-"), std::string(reason) + " " + setting_text(s));
  out.push_back(LightingCommand::set(map_->zone(zone).name, s));
}

void Controller::command_off(Tick tick, int zone, std::vector<LightingCommand>& out) {
  ZoneLighting& zl = zones_[static_cast<std::size_t>(zone)];
  zl.mode = LightMode::Off;
  zl.owner.reset();
  record(tick, "OFF", zone, "-", "-");
  out.push_back(LightingCommand::off(map_->zone(zone).name));
}

Cell Controller::observe(Cell truth) {
  const int dr = static_cast<int>(std::lround(oracles_.noise_sigma * rng_.normal()));
  const int dc = static_cast<int>(std::lround(oracles_.noise_sigma * rng_.normal()));
  const Cell c{truth.row + dr, truth.col + dc};
  return map_->passable(c) ? c : truth;
}

std::string Controller::recognize(int subject) {
  const auto it = subject_profiles_.find(subject);
  if (it == subject_profiles_.end() || !it->second) return kUnknownPerson;
  const std::string& truth = *it->second;
  if (rng_.bernoulli(oracles_.p_correct_id) || profiles_.size() < 2) return truth;
  std::vector<const ResidentProfile*> others;
  for (const ResidentProfile& p : profiles_)
    if (p.person_id != truth) others.push_back(&p);
  return others[static_cast<std::size_t>(rng_.index(others.size()))]->person_id;
}

void Controller::extend_history(Track& t, Cell to) {
  const StateId target = *mdp_->state_of(to);
  std::vector<StateId>& cells = t.history.cells;
  for (StateId s : bfs_path(*mdp_, cells.back(), target)) cells.push_back(s);
  if (cells.size() > kMaxHistory)
    cells.erase(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(cells.size() - kMaxHistory));
}

const LightSetting& Controller::lighting_of(const std::string& person) const {
  const ResidentProfile* p = find_profile(profiles_, person);
  if (!p) throw std::logic_error("no profile for " + person);
  return p->lighting;
}

}  // namespace pathlight
