#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pathlight/profiles.hpp"

namespace pathlight {

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { Parse, Range, InvalidZoneName };
  ProtocolError(Kind kind, const std::string& field, std::size_t position, const std::string& what)
      : std::runtime_error(what), kind_(kind), field_(field), position_(position) {}

  Kind kind() const { return kind_; }
  // Which token failed: "verb", "zone", "red", "green", "blue", "intensity", "end".
  const std::string& field() const { return field_; }
  // Byte offset into the line where the failing token starts.
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::string field_;
  std::size_t position_;
};

// Zone names travel as single tokens: printable ASCII, no spaces.
bool valid_zone_name(std::string_view zone);

class LightingCommand {
 public:
  enum class Kind { Set, Off };

  static LightingCommand set(std::string zone, int red, int green, int blue, int intensity);
  static LightingCommand set(std::string zone, const LightSetting& s);
  static LightingCommand off(std::string zone);

  Kind kind() const { return kind_; }
  const std::string& zone() const { return zone_; }
  const LightSetting& setting() const { return setting_; }

  bool operator==(const LightingCommand&) const = default;

 private:
  LightingCommand(Kind kind, std::string zone, LightSetting s) : kind_(kind), zone_(std::move(zone)), setting_(s) {}

  Kind kind_;
  std::string zone_;
  LightSetting setting_;
};

std::string encode(const LightingCommand& cmd);

// One line, trailing '\n' optional. Decimal fields without sign or leading
// zeros.
LightingCommand decode(std::string_view line);

struct LampEntry {
  LightingCommand command;
  std::uint64_t sequence;  // 1-based position among acknowledged commands
};

/// Last acknowledged command per zone. Zones not present are OFF.
class LampState {
 public:
  void apply(const LightingCommand& cmd);
  const LampEntry* find(const std::string& zone) const;
  // "STATE <zone> R G B I\n" or "STATE <zone> OFF\n".
  std::string describe(const std::string& zone) const;
  std::uint64_t applied() const { return applied_; }

 private:
  std::map<std::string, LampEntry> zones_;
  std::uint64_t applied_ = 0;
};

// Request handling shared by the server and in-process tests. Returns the
// reply line including '\n'.
std::string handle_request(std::string_view line, LampState& state, std::vector<LightingCommand>* journal);

class BindFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LampAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;
};

inline constexpr const char* kLampAddrEnv = "PATHLIGHT_LAMP_ADDR";

// "host:port"; throws std::invalid_argument.
LampAddress parse_lamp_address(std::string_view text);
// From $PATHLIGHT_LAMP_ADDR, else 127.0.0.1:7878.
LampAddress default_lamp_address();

/// TCP lamp simulator. One thread per connection; state updates are
/// serialized under a mutex so each line applies atomically.
class LampServer {
 public:
  // Port 0 picks an ephemeral port; see port().
  explicit LampServer(const LampAddress& bind);
  ~LampServer();
  LampServer(const LampServer&) = delete;
  LampServer& operator=(const LampServer&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  std::vector<LightingCommand> journal() const;
  std::string describe(const std::string& zone) const;

 private:
  void accept_loop();
  void serve_connection(int fd);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  mutable std::mutex mutex_;
  LampState state_;
  std::vector<LightingCommand> journal_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

class LampClient {
 public:
  explicit LampClient(const LampAddress& addr);
  ~LampClient();
  LampClient(const LampClient&) = delete;
  LampClient& operator=(const LampClient&) = delete;

  // Sends one line (newline appended if missing) and returns the reply
  // without its newline.
  std::string request(std::string_view line);
  // Throws std::runtime_error unless the reply is OK.
  void send(const LightingCommand& cmd);

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace pathlight
