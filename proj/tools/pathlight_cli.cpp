// pathlight: dataset generation, training, evaluation, simulation, lamp
// service and self-checks.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <unistd.h>

#include "CLI11.hpp"
#include "pathlight/fileio.hpp"
#include "pathlight/irl.hpp"
#include "pathlight/lampnet.hpp"
#include "pathlight/metrics.hpp"
#include "pathlight/reward_spec.hpp"
#include "pathlight/scenario.hpp"
#include "pathlight/selfcheck.hpp"
#include "pathlight/synth.hpp"

namespace fs = std::filesystem;
using namespace pathlight;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

std::string out_path(const std::string& dir, const char* name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

std::string format_loss(const std::vector<double>& curve) {
  std::string out = "epoch,mean_log_likelihood\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, curve[i]);
    out += buf;
  }
  return out;
}

struct Common {
  std::string map;
  std::uint64_t seed = kDefaultSeed;
  int horizon = kDefaultHorizon;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--map", c.map, "house map file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--horizon", c.horizon, "planning horizon N")->capture_default_str()->check(CLI::PositiveNumber);
  if (needs_out) cmd->add_option("--out", c.out, "output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalised lighting from MaxEnt trajectory forecasts"};
  app.require_subcommand(1);

  Common gen;
  std::string reward_path;
  DemoConfig demo_cfg;
  auto* gen_cmd = app.add_subcommand("gen-demos", "sample synthetic demonstrations from a ground-truth reward");
  add_common(gen_cmd, gen);
  gen_cmd->add_option("--reward", reward_path, "ground-truth reward file")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--count", demo_cfg.count, "number of demonstrations")->capture_default_str();
  gen_cmd->add_option("--min-length", demo_cfg.min_length, "minimum cells moved")->capture_default_str();

  Common tr;
  std::string demos_path;
  TrainConfig train_cfg;
  std::string model_kind = "linear";
  auto* train_cmd = app.add_subcommand("train", "fit the reward to demonstrations");
  add_common(train_cmd, tr);
  train_cmd->add_option("--demos", demos_path, "trajectory file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--epochs", train_cfg.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train_cfg.learning_rate, "learning rate")->capture_default_str();
  train_cmd->add_option("--batch", train_cfg.batch)->capture_default_str();
  train_cmd->add_option("--model", model_kind, "linear or mlp")
      ->check(CLI::IsMember({"linear", "mlp"}))
      ->capture_default_str();
  train_cmd->add_option("--hidden", train_cfg.hidden, "MLP hidden width")->capture_default_str();

  Common ev;
  std::string ckpt_path;
  std::string eval_demos;
  EvalConfig eval_cfg;
  double observed = 0.4;
  bool baseline = false;
  auto* eval_cmd = app.add_subcommand("eval", "forecast held-out demonstrations and report MinADE/MinFDE");
  add_common(eval_cmd, ev);
  eval_cmd->add_option("--checkpoint", ckpt_path, "trained model")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--demos", eval_demos, "held-out trajectory file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--k", eval_cfg.ks, "forecast set sizes")->capture_default_str();
  eval_cmd->add_option("--samples", eval_cfg.samples, "sampled paths per example")->capture_default_str();
  eval_cmd->add_option("--observed", observed, "fraction of each path given as history")->capture_default_str();
  eval_cmd->add_flag("--baseline", baseline, "also score the uniform-policy baseline");

  Common sim;
  std::string scenario_path;
  std::string profiles_path;
  std::string sim_ckpt;
  std::optional<std::string> lamp_addr;
  bool use_lamp = false;
  std::optional<std::uint64_t> sim_seed;
  auto* sim_cmd = app.add_subcommand("simulate", "replay a scenario through the lighting pipeline");
  sim_cmd->add_option("--map", sim.map, "house map file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--horizon", sim.horizon, "planning horizon N")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "output directory")->required();
  sim_cmd->add_option("--scenario", scenario_path, "scenario file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--profiles", profiles_path, "profile store")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--checkpoint", sim_ckpt, "model for forecasting; omit to disable forecasts")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim_seed, "overrides the scenario seed");
  sim_cmd->add_option("--lamp-addr", lamp_addr, "stream commands to this lamp server (host:port)");
  sim_cmd->add_flag("--lamp", use_lamp, "stream commands to the lamp server from $PATHLIGHT_LAMP_ADDR");

  std::optional<std::string> serve_addr;
  auto* serve_cmd = app.add_subcommand("serve-lamp", "run the lamp controller simulator");
  serve_cmd->add_option("--lamp-addr", serve_addr, "bind address host:port (default $PATHLIGHT_LAMP_ADDR or 127.0.0.1:7878)");

  SelfcheckOptions check_opt;
  std::string fault;
  auto* check_cmd = app.add_subcommand("selfcheck", "run built-in oracle checks");
  check_cmd->add_flag("--quick", check_opt.quick, "reduced instance counts");
  check_cmd->add_option("--seed", check_opt.seed)->capture_default_str();
  check_cmd->add_option("--inject-fault", fault, "mutation fixture")->check(CLI::IsMember({"gradient-sign"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      const GridMap map = load_map_file(gen.map);
      const RewardModel truth = parse_reward_spec(read_file(reward_path), features(map));
      demo_cfg.seed = gen.seed;
      demo_cfg.horizon = gen.horizon;
      const auto demos = generate_demos(map, truth, demo_cfg);
      write_file_atomic(out_path(gen.out, "demos.csv"), format_trajectories(demos, Mdp(map)));
      double mean = 0.0;
      for (const Trajectory& t : demos) mean += static_cast<double>(t.length());
      if (!demos.empty()) mean /= static_cast<double>(demos.size());
      std::printf("wrote %zu demonstrations, mean length %.2f cells\n", demos.size(), mean);
    } else if (*train_cmd) {
      const GridMap map = load_map_file(tr.map);
      const Mdp mdp(map);
      const auto demos = parse_trajectories(read_file(demos_path), mdp);
      train_cfg.seed = tr.seed;
      train_cfg.horizon = tr.horizon;
      train_cfg.kind = model_kind == "mlp" ? RewardModel::Kind::Mlp : RewardModel::Kind::Linear;
      const TrainResult result = train(demos, map, train_cfg);
      write_file_atomic(out_path(tr.out, "model.ckpt"), format_checkpoint(result.model));
      write_file_atomic(out_path(tr.out, "loss.csv"), format_loss(result.epoch_log_likelihood));
      std::printf("trained %d epochs, final mean log-likelihood %.6f\n", train_cfg.epochs,
                  result.epoch_log_likelihood.empty() ? 0.0 : result.epoch_log_likelihood.back());
    } else if (*eval_cmd) {
      const GridMap map = load_map_file(ev.map);
      const Mdp mdp(map);
      const RewardModel model = parse_checkpoint(read_file(ckpt_path));
      const StateFeatures sf = state_features(features(map), mdp);
      const auto demos = parse_trajectories(read_file(eval_demos), mdp);
      const auto examples = make_examples(demos, mdp, observed, eval_cfg.points);
      eval_cfg.seed = ev.seed;
      const GoalPolicies policies(map, mdp, reward_field(model, sf), ev.horizon);
      const MetricsTable table = evaluate(examples, policies, mdp, eval_cfg);
      write_file_atomic(out_path(ev.out, "metrics.csv"), format_metrics(table));
      std::fputs(format_metrics(table).c_str(), stdout);
      if (baseline) {
        const MetricsTable base = evaluate(examples, GoalPolicies::uniform(map, mdp, ev.horizon), mdp, eval_cfg);
        write_file_atomic(out_path(ev.out, "baseline_metrics.csv"), format_metrics(base));
        std::fputs("baseline:\n", stdout);
        std::fputs(format_metrics(base).c_str(), stdout);
      }
    } else if (*sim_cmd) {
      const GridMap map = load_map_file(sim.map);
      const Mdp mdp(map);
      const Scenario scenario = load_scenario(scenario_path);
      const auto profiles = profile_store_load(profiles_path);
      Forecaster forecaster;
      if (!sim_ckpt.empty()) {
        const RewardModel model = parse_checkpoint(read_file(sim_ckpt));
        const StateFeatures sf = state_features(features(map), mdp);
        forecaster = MaxEntForecaster(map, mdp, reward_field(model, sf), sim.horizon);
      }
      std::optional<LampClient> client;
      if (lamp_addr)
        client.emplace(parse_lamp_address(*lamp_addr));
      else if (use_lamp)
        client.emplace(default_lamp_address());
      CommandSink sink;
      if (client) sink = [&](const LightingCommand& c) { client->send(c); };
      const ScenarioResult result =
          run_scenario(scenario, map, mdp, profiles, forecaster, sim_seed.value_or(scenario.seed), sink);
      write_file_atomic(out_path(sim.out, "events.log"), format_log(result.log));
      write_file_atomic(out_path(sim.out, "latency.csv"), format_latency_report(result));
      std::fputs(format_latency_report(result).c_str(), stdout);
    } else if (*serve_cmd) {
      const LampAddress addr = serve_addr ? parse_lamp_address(*serve_addr) : default_lamp_address();
      LampServer server(addr);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on %s:%u\n", addr.host.c_str(), static_cast<unsigned>(server.port()));
      std::fflush(stdout);
      while (!g_stop) ::usleep(100 * 1000);
      server.stop();
    } else if (*check_cmd) {
      if (fault == "gradient-sign") check_opt.gradient = sign_flipped_gradient;
      bool ok = true;
      for (const CheckResult& r : run_selfcheck(check_opt)) {
        std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
