#include "pathlight/lampnet.hpp"

#include <charconv>
#include <cstdlib>

namespace pathlight {

namespace {

struct Token {
  std::string_view text;
  std::size_t pos;
};

ProtocolError parse_error(const std::string& field, std::size_t pos, const std::string& what) {
  return ProtocolError(ProtocolError::Kind::Parse, field, pos, "parse error at byte " + std::to_string(pos) + " (" +
                                                                   field + "): " + what);
}

// Splits on single spaces; an empty token (doubled or edge space) is a parse
// error. A single trailing newline is dropped first.
std::vector<Token> tokenize(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  for (std::size_t i = 0; i < line.size(); ++i)
    if (line[i] == '\n' || line[i] == '\r') throw parse_error("end", i, "embedded line break");
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t sp = line.find(' ', start);
    const std::size_t end = sp == std::string_view::npos ? line.size() : sp;
    if (end == start) throw parse_error(out.empty() ? "verb" : "end", start, "empty token");
    out.push_back({line.substr(start, end - start), start});
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return out;
}

int parse_field(const Token& t, const std::string& field, int hi) {
  const std::string_view s = t.text;
  if (s.empty() || s.size() > 3) throw parse_error(field, t.pos, "expected 1-3 digits");
  for (char c : s)
    if (c < '0' || c > '9') throw parse_error(field, t.pos, "expected digits");
  if (s.size() > 1 && s[0] == '0') throw parse_error(field, t.pos, "leading zero");
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  if (v > hi)
    throw ProtocolError(ProtocolError::Kind::Range, field, t.pos, field + " = " + std::to_string(v) + " out of range");
  return v;
}

void check_zone(std::string_view zone, std::size_t pos) {
  if (!valid_zone_name(zone))
    throw ProtocolError(ProtocolError::Kind::InvalidZoneName, "zone", pos,
                        "invalid zone name \"" + std::string(zone) + "\"");
}

void check_range(int v, int hi, const char* field) {
  if (v < 0 || v > hi)
    throw ProtocolError(ProtocolError::Kind::Range, field, 0, std::string(field) + " out of range");
}

}  // namespace

bool valid_zone_name(std::string_view zone) {
  if (zone.empty()) return false;
  for (unsigned char c : zone)
    if (c <= ' ' || c >= 0x7f) return false;
  return true;
}

LightingCommand LightingCommand::set(std::string zone, int red, int green, int blue, int intensity) {
  check_zone(zone, 0);
  check_range(red, 255, "red");
  check_range(green, 255, "green");
  check_range(blue, 255, "blue");
  check_range(intensity, 100, "intensity");
  return LightingCommand(Kind::Set, std::move(zone), LightSetting{red, green, blue, intensity});
}

LightingCommand LightingCommand::set(std::string zone, const LightSetting& s) {
  return set(std::move(zone), s.red, s.green, s.blue, s.intensity);
}

LightingCommand LightingCommand::off(std::string zone) {
  check_zone(zone, 0);
  return LightingCommand(Kind::Off, std::move(zone), LightSetting{0, 0, 0, 0});
}

std::string encode(const LightingCommand& cmd) {
  check_zone(cmd.zone(), 0);
  if (cmd.kind() == LightingCommand::Kind::Off) return "OFF " + cmd.zone() + "\n";
  const LightSetting& s = cmd.setting();
  return "SET " + cmd.zone() + " " + std::to_string(s.red) + " " + std::to_string(s.green) + " " +
         std::to_string(s.blue) + " " + std::to_string(s.intensity) + "\n";
}

LightingCommand decode(std::string_view line) {
  const std::vector<Token> t = tokenize(line);
  const std::size_t eol = t.back().pos + t.back().text.size();
  auto need = [&](std::size_t n, const char* next_field) {
    if (t.size() < n) throw parse_error(next_field, eol, "missing field");
    if (t.size() > n) throw parse_error("end", t[n].pos, "trailing input");
  };
  if (t[0].text == "OFF") {
    need(2, "zone");
    check_zone(t[1].text, t[1].pos);
    return LightingCommand::off(std::string(t[1].text));
  }
  if (t[0].text == "SET") {
    static const char* kFields[] = {"zone", "red", "green", "blue", "intensity"};
    if (t.size() < 6) throw parse_error(kFields[t.size() - 1], eol, "missing field");
    need(6, "end");
    check_zone(t[1].text, t[1].pos);
    const int r = parse_field(t[2], "red", 255);
    const int g = parse_field(t[3], "green", 255);
    const int b = parse_field(t[4], "blue", 255);
    const int i = parse_field(t[5], "intensity", 100);
    return LightingCommand::set(std::string(t[1].text), r, g, b, i);
  }
  throw parse_error("verb", 0, "unknown verb \"" + std::string(t[0].text) + "\"");
}

void LampState::apply(const LightingCommand& cmd) {
  ++applied_;
  zones_.insert_or_assign(cmd.zone(), LampEntry{cmd, applied_});
}

const LampEntry* LampState::find(const std::string& zone) const {
  auto it = zones_.find(zone);
  return it == zones_.end() ? nullptr : &it->second;
}

std::string LampState::describe(const std::string& zone) const {
  const LampEntry* e = find(zone);
  if (!e || e->command.kind() == LightingCommand::Kind::Off) return "STATE " + zone + " OFF\n";
  const LightSetting& s = e->command.setting();
  return "STATE " + zone + " " + std::to_string(s.red) + " " + std::to_string(s.green) + " " +
         std::to_string(s.blue) + " " + std::to_string(s.intensity) + "\n";
}

std::string handle_request(std::string_view line, LampState& state, std::vector<LightingCommand>* journal) {
  try {
    const std::vector<Token> t = tokenize(line);
    if (t[0].text == "GET") {
      if (t.size() != 2) throw parse_error("end", 0, "GET takes one zone");
      check_zone(t[1].text, t[1].pos);
      return state.describe(std::string(t[1].text));
    }
    const LightingCommand cmd = decode(line);
    state.apply(cmd);
    if (journal) journal->push_back(cmd);
    return "OK\n";
  } catch (const ProtocolError& e) {
    switch (e.kind()) {
      case ProtocolError::Kind::Parse:
        return "ERR parse\n";
      case ProtocolError::Kind::Range:
        return "ERR range\n";
      case ProtocolError::Kind::InvalidZoneName:
        return "ERR zone\n";
    }
  }
  return "ERR parse\n";
}

LampAddress parse_lamp_address(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size())
    throw std::invalid_argument("lamp address must be host:port, got \"" + std::string(text) + "\"");
  const std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  const auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || end != port.data() + port.size() || value > 65535)
    throw std::invalid_argument("bad port in lamp address \"" + std::string(text) + "\"");
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(value)};
}

LampAddress default_lamp_address() {
  if (const char* env = std::getenv(kLampAddrEnv); env && *env) return parse_lamp_address(env);
  return {};
}

}  // namespace pathlight
