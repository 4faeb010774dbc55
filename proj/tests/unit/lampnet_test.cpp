#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <thread>

#include "pathlight/lampnet.hpp"
#include "pathlight/scenario.hpp"
#include "test_support.hpp"

using namespace pathlight;
using namespace testing_support;

namespace {

ProtocolError decode_error(std::string_view line) {
  try {
    decode(line);
  } catch (const ProtocolError& e) {
    return e;
  }
  ADD_FAILURE() << "decoded: " << line;
  return ProtocolError(ProtocolError::Kind::Parse, "", 0, "");
}

LampAddress ephemeral() { return LampAddress{"127.0.0.1", 0}; }

}  // namespace

TEST(Encode, Examples) {
  EXPECT_EQ(encode(LightingCommand::set("kitchen", 255, 200, 50, 80)), "SET kitchen 255 200 50 80\n");
  EXPECT_EQ(encode(LightingCommand::off("hall")), "OFF hall\n");
  try {
    LightingCommand::off("living room");
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.kind(), ProtocolError::Kind::InvalidZoneName);
  }
  EXPECT_THROW(LightingCommand::set("kitchen", 0, 0, 0, 101), ProtocolError);
}

TEST(Decode, Examples) {
  EXPECT_EQ(decode("SET kitchen 255 200 50 80\n"), LightingCommand::set("kitchen", 255, 200, 50, 80));
  EXPECT_EQ(decode("OFF hall"), LightingCommand::off("hall"));

  const ProtocolError range = decode_error("SET kitchen 300 0 0 50\n");
  EXPECT_EQ(range.kind(), ProtocolError::Kind::Range);
  EXPECT_EQ(range.field(), "red");

  const ProtocolError verb = decode_error("DIM kitchen 4\n");
  EXPECT_EQ(verb.kind(), ProtocolError::Kind::Parse);
  EXPECT_EQ(verb.field(), "verb");
  EXPECT_EQ(verb.position(), 0u);
}

TEST(Decode, StrictTokens) {
  struct Case {
    const char* line;
    const char* field;
    std::size_t pos;
  };
  const Case cases[] = {
      {"SET kitchen 255 200 50\n", "intensity", 22},
      {"SET kitchen 255 200 50 80 1\n", "end", 26},
      {"SET kitchen 255 200 050 80\n", "blue", 20},
      {"SET kitchen 255  200 50 80\n", "end", 16},
      {"SET kitchen 255 200 50 8x\n", "intensity", 23},
      {"SET kitchen -1 200 50 80\n", "red", 12},
      {"OFF\n", "zone", 3},
      {"OFF hall\r\n", "end", 8},
      {"\n", "verb", 0},
      {"OFF hall\n\n", "end", 8},
  };
  for (const Case& c : cases) {
    const ProtocolError e = decode_error(c.line);
    EXPECT_EQ(e.kind(), ProtocolError::Kind::Parse) << c.line;
    EXPECT_EQ(e.field(), c.field) << c.line;
    EXPECT_EQ(e.position(), c.pos) << c.line;
  }
  EXPECT_EQ(decode_error("SET kitchen 0 0 0 101").field(), "intensity");
  EXPECT_EQ(decode("SET k 0 0 0 0"), LightingCommand::set("k", 0, 0, 0, 0));
}

TEST(Codec, BijectiveOverRandomCommands) {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> pct(0, 100);
  std::uniform_int_distribution<int> glyph(33, 126);
  std::uniform_int_distribution<int> len(1, 12);
  for (int i = 0; i < 10000; ++i) {
    std::string zone;
    for (int n = len(gen); n > 0; --n) zone += static_cast<char>(glyph(gen));
    const LightingCommand c = gen() % 5 == 0 ? LightingCommand::off(zone)
                                             : LightingCommand::set(zone, byte(gen), byte(gen), byte(gen), pct(gen));
    const std::string line = encode(c);
    ASSERT_EQ(decode(line), c) << line;
    ASSERT_EQ(encode(decode(line)), line);
  }
}

TEST(HandleRequest, StateMachine) {
  LampState state;
  std::vector<LightingCommand> journal;
  EXPECT_EQ(handle_request("GET porch\n", state, &journal), "STATE porch OFF\n");
  EXPECT_EQ(handle_request("SET porch 1 2 3 4\n", state, &journal), "OK\n");
  EXPECT_EQ(handle_request("GET porch\n", state, &journal), "STATE porch 1 2 3 4\n");
  EXPECT_EQ(handle_request("OFF porch\n", state, &journal), "OK\n");
  EXPECT_EQ(handle_request("GET porch\n", state, &journal), "STATE porch OFF\n");
  EXPECT_EQ(handle_request("SET porch 1 2 3 400\n", state, &journal), "ERR range\n");
  EXPECT_EQ(handle_request("BLINK porch\n", state, &journal), "ERR parse\n");
  EXPECT_EQ(handle_request("GET\n", state, &journal), "ERR parse\n");
  EXPECT_EQ(journal.size(), 2u);
  EXPECT_EQ(state.applied(), 2u);
  EXPECT_EQ(state.find("porch")->sequence, 2u);
}

TEST(LampAddress, Parsing) {
  const LampAddress a = parse_lamp_address("10.0.0.2:9000");
  EXPECT_EQ(a.host, "10.0.0.2");
  EXPECT_EQ(a.port, 9000);
  EXPECT_THROW(parse_lamp_address("nohost"), std::invalid_argument);
  EXPECT_THROW(parse_lamp_address("h:70000"), std::invalid_argument);
  EXPECT_THROW(parse_lamp_address(":80"), std::invalid_argument);
  ::unsetenv(kLampAddrEnv);
  EXPECT_EQ(default_lamp_address().port, 7878);
  ::setenv(kLampAddrEnv, "127.0.0.1:7999", 1);
  EXPECT_EQ(default_lamp_address().port, 7999);
  ::unsetenv(kLampAddrEnv);
}

TEST(LampServer, SetGetOffOverTcp) {
  LampServer server(ephemeral());
  ASSERT_NE(server.port(), 0);
  LampClient client({"127.0.0.1", server.port()});
  EXPECT_EQ(client.request("GET kitchen"), "STATE kitchen OFF");
  EXPECT_EQ(client.request("SET kitchen 255 200 50 80\n"), "OK");
  EXPECT_EQ(client.request("GET kitchen\n"), "STATE kitchen 255 200 50 80");
  // malformed line: one error reply and the connection stays usable
  EXPECT_EQ(client.request("SET kitchen 255 200"), "ERR parse");
  EXPECT_EQ(client.request("SET kitchen 256 0 0 0"), "ERR range");
  EXPECT_EQ(client.request("OFF kitchen"), "OK");
  EXPECT_EQ(client.request("GET kitchen"), "STATE kitchen OFF");
  EXPECT_EQ(server.journal().size(), 2u);
  server.stop();
}

TEST(LampServer, BindFailureOnTakenPort) {
  LampServer first(ephemeral());
  EXPECT_THROW(LampServer({"127.0.0.1", first.port()}), BindFailure);
  EXPECT_THROW(LampServer({"not-an-ip", 0}), BindFailure);
}

TEST(LampServer, ConcurrentClientsApplyAtomically) {
  LampServer server(ephemeral());
  auto worker = [&](int id) {
    LampClient c({"127.0.0.1", server.port()});
    for (int i = 0; i < 100; ++i)
      c.send(LightingCommand::set("zone" + std::to_string(id), i % 256, id, 0, i % 101));
  };
  std::vector<std::thread> threads;
  for (int id = 0; id < 4; ++id) threads.emplace_back(worker, id);
  for (auto& t : threads) t.join();
  EXPECT_EQ(server.journal().size(), 400u);
  for (int id = 0; id < 4; ++id)
    EXPECT_EQ(server.describe("zone" + std::to_string(id)),
              "STATE zone" + std::to_string(id) + " 99 " + std::to_string(id) + " 0 99\n");
}

TEST(LampServer, ScenarioCommandsArriveInOrder) {
  const GridMap map = parse_map(canonical_map_text());
  const Mdp mdp(map);
  const auto profiles = profile_store_load(data_path("profiles.json"));
  const Scenario s = load_scenario(data_path("scenarios/two_residents.json"));
  LampServer server(ephemeral());
  LampClient client({"127.0.0.1", server.port()});
  const ScenarioResult res =
      run_scenario(s, map, mdp, profiles, {}, s.seed, [&](const LightingCommand& c) { client.send(c); });
  EXPECT_EQ(server.journal(), res.commands);
  EXPECT_FALSE(res.commands.empty());
}
