#include "pathlight/trajectory.hpp"

#include <charconv>

namespace pathlight {

namespace {

IrlError inconsistent(const std::string& why) { return IrlError(IrlError::Kind::InconsistentTrajectory, why); }

IrlError malformed(int line, const std::string& why) {
  return IrlError(IrlError::Kind::MalformedTrajectoryFile, "trajectory line " + std::to_string(line) + ": " + why,
                  line);
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Trajectory make_trajectory(const Mdp& mdp, StateId start, const std::vector<Action>& actions) {
  Trajectory t;
  t.states.push_back(start);
  for (Action a : actions) {
    t.actions.push_back(a);
    t.states.push_back(mdp.transition(t.states.back(), a));
  }
  return t;
}

void check_trajectory(const Trajectory& traj, const Mdp& mdp) {
  if (traj.states.empty()) throw inconsistent("trajectory has no states");
  if (traj.states.size() != traj.actions.size() + 1)
    throw inconsistent("trajectory needs exactly one more state than actions");
  for (StateId s : traj.states)
    if (!mdp.valid(s)) throw inconsistent("trajectory references invalid state " + std::to_string(s));
  for (std::size_t i = 0; i < traj.actions.size(); ++i)
    if (mdp.transition(traj.states[i], traj.actions[i]) != traj.states[i + 1])
      throw inconsistent("step " + std::to_string(i) + " does not follow the transition table");
}

std::size_t steps_before_arrival(const Trajectory& traj, StateId goal) {
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    if (traj.states[i] == goal) return i;
  return traj.actions.size();
}

std::string format_trajectories(const std::vector<Trajectory>& trajs, const Mdp& mdp) {
  std::string out;
  for (const Trajectory& t : trajs) {
    check_trajectory(t, mdp);
    out += std::to_string(t.id);
    out += ',';
    out += t.goal_zone ? std::to_string(*t.goal_zone) : "-";
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      const Cell c = mdp.cell(t.states[i]);
      out += ",(" + std::to_string(c.row) + ',' + std::to_string(c.col) + ',';
      out += i < t.actions.size() ? action_glyph(t.actions[i]) : '.';
      out += ')';
    }
    out += '\n';
  }
  return out;
}

std::vector<Trajectory> parse_trajectories(std::string_view text, const Mdp& mdp) {
  std::vector<Trajectory> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) throw malformed(line_no, "missing trailing newline");
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;

    Trajectory t;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw malformed(line_no, "expected id,goal,steps");
    if (!parse_int(line.substr(0, c1), t.id)) throw malformed(line_no, "bad trajectory id");
    const std::string_view goal = line.substr(c1 + 1, c2 - c1 - 1);
    if (goal != "-") {
      int g = 0;
      if (!parse_int(goal, g) || g < 0) throw malformed(line_no, "bad goal zone");
      t.goal_zone = g;
    }

    std::size_t p = c2 + 1;
    bool terminal_seen = false;
    while (p < line.size()) {
      if (terminal_seen) throw malformed(line_no, "steps after the terminal triple");
      if (line[p] != '(') throw malformed(line_no, "expected '('");
      const std::size_t close = line.find(')', p);
      if (close == std::string_view::npos) throw malformed(line_no, "unterminated triple");
      const std::string_view triple = line.substr(p + 1, close - p - 1);
      const std::size_t t1 = triple.find(',');
      const std::size_t t2 = t1 == std::string_view::npos ? t1 : triple.find(',', t1 + 1);
      Cell cell;
      if (t2 == std::string_view::npos || !parse_int(triple.substr(0, t1), cell.row) ||
          !parse_int(triple.substr(t1 + 1, t2 - t1 - 1), cell.col) || triple.size() != t2 + 2)
        throw malformed(line_no, "bad triple '" + std::string(triple) + "'");
      const auto state = mdp.state_of(cell);
      if (!state) throw malformed(line_no, "cell is not passable");
      t.states.push_back(*state);
      const char g = triple.back();
      if (g == '.') {
        terminal_seen = true;
      } else {
        const auto a = action_from_glyph(g);
        if (!a) throw malformed(line_no, std::string("unknown action '") + g + "'");
        t.actions.push_back(*a);
      }
      p = close + 1;
      if (p < line.size()) {
        if (line[p] != ',') throw malformed(line_no, "expected ',' between triples");
        ++p;
        if (p == line.size()) throw malformed(line_no, "trailing comma");
      }
    }
    if (!terminal_seen) throw malformed(line_no, "missing terminal triple");
    check_trajectory(t, mdp);
    out.push_back(std::move(t));
    ++line_no;
  }
  return out;
}

}  // namespace pathlight
