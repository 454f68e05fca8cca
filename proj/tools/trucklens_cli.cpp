#include <csignal>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "trucklens/trucklens.h"

namespace {

int report(tl_status status) {
  if (status == TL_OK) return 0;
  std::fprintf(stderr, "trucklens: %s\n", tl_last_error());
  return static_cast<int>(status);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int serve(const std::string& data, const std::string& config, const std::string& host, int port) {
  // SIGINT/SIGTERM are handled by a waiter thread so stop() runs outside a
  // signal handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  tl_server* server = nullptr;
  if (int rc = report(tl_server_create(opt(data), opt(config), &server))) return rc;
  char* errors = nullptr;
  if (tl_server_load_errors(server, &errors) == TL_OK) {
    if (std::string(errors) != "[]") std::fprintf(stderr, "trucklens: skipped files: %s\n", errors);
    tl_string_free(errors);
  }
  int bound = 0;
  if (int rc = report(tl_server_bind(server, host.c_str(), port, &bound))) {
    tl_server_free(server);
    return rc;
  }
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    tl_server_stop(server);
  });
  const int rc = report(tl_server_run(server));
  // run() also returns on bind-time failures; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  tl_server_free(server);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Industrial truck operation analysis from indoor positioning logs"};
  app.set_version_flag("--version", std::string(tl_version()));
  app.require_subcommand(1);

  std::string input, config, out, spec, script, reference, data, host = "127.0.0.1";
  std::optional<std::uint64_t> seed;
  int port = 8080;
  double duration = 60.0, rate = 100.0, noise = 2.0;

  auto* analyze = app.add_subcommand("analyze", "Run the kinematic chain, event detection, KPIs and heatmaps");
  analyze->add_option("input", input, "Position log (.csv or .jsonl)")->required();
  analyze->add_option("--config", config, "Analysis config JSON");
  analyze->add_option("--out", out, "Output directory")->required();

  auto* bench = app.add_subcommand("static-bench", "Static benchmark sweep over rate, scatter and filter");
  bench->add_option("spec", spec, "Sweep spec JSON (defaults when omitted)");
  bench->add_option("--config", spec, "Sweep spec JSON (same as the positional argument)");
  bench->add_option("--out", out, "Output CSV")->required();
  bench->add_option("--seed", seed, "Overrides the sweep spec seed");

  auto* synth = app.add_subcommand("synth", "Synthetic position logs");
  synth->require_subcommand(1);
  auto* synth_static = synth->add_subcommand("static", "Parked vehicle with sensor noise");
  synth_static->add_option("--duration", duration, "Seconds")->capture_default_str();
  synth_static->add_option("--rate", rate, "Hz")->capture_default_str();
  synth_static->add_option("--noise", noise, "Per-axis noise std, mm")->capture_default_str();
  synth_static->add_option("--seed", seed, "RNG seed (default 1)");
  synth_static->add_option("--out", out, "Output log (.csv or .jsonl)")->required();

  auto* synth_move = synth->add_subcommand("movement", "Scripted warehouse scenario");
  synth_move->add_option("--config", script, "Movement script JSON (built-in scenario when omitted)");
  synth_move->add_option("--rate", rate, "Hz")->capture_default_str();
  synth_move->add_option("--noise", noise, "Per-axis noise std, mm")->capture_default_str();
  synth_move->add_option("--seed", seed, "RNG seed (default 1)");
  synth_move->add_option("--out", out, "Output log (.csv or .jsonl)")->required();
  synth_move->add_option("--reference", reference, "Write the scripted events as JSONL");

  auto* srv = app.add_subcommand("serve", "HTTP API over a data directory");
  srv->add_option("--data", data, "Data root with .csv/.jsonl logs");
  srv->add_option("--config", config, "Default analysis config JSON");
  srv->add_option("--host", host)->capture_default_str();
  srv->add_option("--port", port, "0 picks a free port")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*analyze) return report(tl_analyze(input.c_str(), opt(config), out.c_str()));
  if (*bench) return report(tl_static_bench(opt(spec), out.c_str(), seed.value_or(0), seed.has_value()));
  if (*synth_static) return report(tl_synth_static(duration, rate, noise, seed.value_or(1), out.c_str()));
  if (*synth_move)
    return report(tl_synth_movement(opt(script), rate, noise, seed.value_or(1), out.c_str(), opt(reference)));
  if (*srv) return serve(data, config, host, port);
  return 1;
}
