// Command-line front end. Talks to the simulator only through the C API.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "peerfl/peerfl.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code(peerfl_status s) {
  switch (s) {
    case PEERFL_OK: return 0;
    case PEERFL_ERR_CONFIG:
    case PEERFL_ERR_ARGUMENT: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report(peerfl_status s) {
  std::cerr << "peerfl: " << peerfl_last_error() << "\n";
  return exit_code(s);
}

struct Owned {
  char* s = nullptr;
  ~Owned() { peerfl_string_free(s); }
};

// Loads and validates; prints every violation. Returns 0 or an exit code.
int load_checked(const std::string& path, std::optional<long long> seed, peerfl_config** cfg) {
  if (auto s = peerfl_config_from_file(path.c_str(), cfg)) return report(s);
  if (seed) peerfl_config_set_seed(*cfg, *seed);
  std::size_t n = 0;
  if (auto s = peerfl_config_validate(*cfg, &n)) return report(s);
  for (std::size_t i = 0; i < n; ++i) std::cerr << path << ": " << peerfl_config_error(*cfg, i) << "\n";
  return n == 0 ? 0 : kExitConfig;
}

int cmd_run(const std::string& config, std::optional<long long> seed, const std::string& out,
            const std::string& format, bool summary) {
  peerfl_config* cfg = nullptr;
  if (int rc = load_checked(config, seed, &cfg)) {
    peerfl_config_free(cfg);
    return rc;
  }
  peerfl_result* result = nullptr;
  const peerfl_status s = peerfl_run(cfg, &result);
  peerfl_config_free(cfg);
  if (s != PEERFL_OK) return report(s);

  const peerfl_format fmt = format == "jsonl" ? PEERFL_FORMAT_JSONL : PEERFL_FORMAT_CSV;
  int rc = 0;
  if (out.empty()) {
    Owned text;
    if (auto st = peerfl_result_format(result, fmt, &text.s)) rc = report(st);
    else std::fputs(text.s, stdout);
  } else if (auto st = peerfl_result_write(result, out.c_str(), fmt)) {
    rc = report(st);
  }
  if (rc == 0 && summary) {
    Owned json;
    if (auto st = peerfl_result_summary_json(result, &json.s)) rc = report(st);
    else std::fprintf(out.empty() ? stderr : stdout, "%s\n", json.s);
  }
  peerfl_result_free(result);
  return rc;
}

int cmd_validate(const std::string& config) {
  peerfl_config* cfg = nullptr;
  const int rc = load_checked(config, std::nullopt, &cfg);
  peerfl_config_free(cfg);
  if (rc == 0) std::cout << config << ": ok\n";
  return rc;
}

int cmd_gen_config(const std::string& preset) {
  Owned yaml;
  if (auto s = peerfl_preset_yaml(preset.c_str(), &yaml.s)) return report(s);
  std::fputs(yaml.s, stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"peerfl: discrete-event simulator for centralized and peer-to-peer federated learning"};
  app.set_version_flag("--version", std::string(peerfl_version()));
  app.require_subcommand(1);

  std::string config, out, format = "csv", preset;
  std::optional<long long> seed;
  bool summary = false;

  auto* run = app.add_subcommand("run", "Run a simulation and emit per-event metrics");
  run->add_option("--config", config, "YAML configuration")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--out", out, "Metrics file (default: stdout)");
  run->add_option("--format", format, "Metrics format")->check(CLI::IsMember({"csv", "jsonl"}));
  run->add_flag("--summary", summary, "Print a JSON run summary (stdout with --out, else stderr)");

  auto* val = app.add_subcommand("validate", "Check a configuration and list every problem");
  val->add_option("--config", config, "YAML configuration")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen-config", "Print an example configuration");
  gen->add_option("--preset", preset, "line3|star10|scale100")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (const char* level = std::getenv("PEERFL_LOG")) {
    if (peerfl_set_log_level(level) != PEERFL_OK) std::cerr << "peerfl: ignoring PEERFL_LOG=" << level << "\n";
  }

  if (*run) return cmd_run(config, seed, out, format, summary);
  if (*val) return cmd_validate(config);
  return cmd_gen_config(preset);
}
