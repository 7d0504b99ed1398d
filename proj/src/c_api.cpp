#include "peerfl/peerfl.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "config.hpp"
#include "error.hpp"
#include "flcore.hpp"
#include "log.hpp"
#include "metrics.hpp"

struct peerfl_config {
  peerfl::SimConfig cfg;
  std::vector<std::string> errors;
};

struct peerfl_result {
  peerfl::SimResult sim;
};

namespace {

thread_local std::string last_error;

peerfl_status fail(peerfl_status status, std::string msg) {
  last_error = std::move(msg);
  return status;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
peerfl_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const peerfl::ConfigError& e) {
    return fail(PEERFL_ERR_CONFIG, e.what());
  } catch (const peerfl::FormatError& e) {
    return fail(PEERFL_ERR_CONFIG, e.what());
  } catch (const peerfl::SimulationError& e) {
    return fail(PEERFL_ERR_RUNTIME, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PEERFL_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(PEERFL_ERR_RUNTIME, e.what());
  }
}

peerfl::MetricsFormat to_format(peerfl_format f) {
  return f == PEERFL_FORMAT_JSONL ? peerfl::MetricsFormat::Jsonl : peerfl::MetricsFormat::Csv;
}

bool valid_format(peerfl_format f) { return f == PEERFL_FORMAT_CSV || f == PEERFL_FORMAT_JSONL; }

const char* event_name(peerfl::RecordEvent e) {
  switch (e) {
    case peerfl::RecordEvent::Train: return "train";
    case peerfl::RecordEvent::Receive: return "receive";
    case peerfl::RecordEvent::Send: return "send";
    case peerfl::RecordEvent::Eval: return "eval";
    case peerfl::RecordEvent::Drop: return "drop";
    case peerfl::RecordEvent::Warn: return "warn";
    case peerfl::RecordEvent::Observe: return "observe";
  }
  return "unknown";
}

}  // namespace

extern "C" {

const char* peerfl_version(void) { return "0.1.0"; }

const char* peerfl_last_error(void) { return last_error.c_str(); }

peerfl_status peerfl_set_log_level(const char* level) {
  peerfl::LogLevel l;
  if (!level || !peerfl::parse_log_level(level, l))
    return fail(PEERFL_ERR_ARGUMENT, "unknown log level (expected off|error|warn|info|debug)");
  peerfl::set_log_level(l);
  return PEERFL_OK;
}

void peerfl_string_free(char* s) { std::free(s); }

peerfl_status peerfl_config_from_string(const char* yaml, peerfl_config** out) {
  if (!yaml || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new peerfl_config{peerfl::parse_config(yaml), {}};
    return PEERFL_OK;
  });
}

peerfl_status peerfl_config_from_file(const char* path, peerfl_config** out) {
  if (!path || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new peerfl_config{peerfl::load_config(path), {}};
    return PEERFL_OK;
  });
}

peerfl_status peerfl_preset_yaml(const char* name, char** out) {
  if (!name || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  const auto text = peerfl::preset_yaml(name);
  if (!text) {
    std::string known;
    for (const auto& n : peerfl::preset_names()) known += (known.empty() ? "" : "|") + n;
    return fail(PEERFL_ERR_ARGUMENT, "unknown preset '" + std::string(name) + "' (expected " + known + ")");
  }
  *out = dup_string(*text);
  return PEERFL_OK;
}

void peerfl_config_free(peerfl_config* cfg) { delete cfg; }

peerfl_status peerfl_config_set_seed(peerfl_config* cfg, int64_t seed) {
  if (!cfg) return fail(PEERFL_ERR_ARGUMENT, "null config");
  cfg->cfg.seed = seed;
  return PEERFL_OK;
}

peerfl_status peerfl_config_render(const peerfl_config* cfg, char** out) {
  if (!cfg || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(peerfl::render_config(cfg->cfg));
    return PEERFL_OK;
  });
}

peerfl_status peerfl_config_validate(peerfl_config* cfg, size_t* n_errors) {
  if (!cfg || !n_errors) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->errors = peerfl::validate(cfg->cfg);
    *n_errors = cfg->errors.size();
    return PEERFL_OK;
  });
}

const char* peerfl_config_error(const peerfl_config* cfg, size_t index) {
  if (!cfg || index >= cfg->errors.size()) return nullptr;
  return cfg->errors[index].c_str();
}

peerfl_status peerfl_run(const peerfl_config* cfg, peerfl_result** out) {
  if (!cfg || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new peerfl_result{peerfl::run_simulation(cfg->cfg)};
    return PEERFL_OK;
  });
}

void peerfl_result_free(peerfl_result* result) { delete result; }

peerfl_status peerfl_result_write(const peerfl_result* result, const char* path, peerfl_format format) {
  if (!result || !path) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  if (!valid_format(format)) return fail(PEERFL_ERR_ARGUMENT, "unknown format");
  try {
    peerfl::write_metrics(result->sim.log, std::string(path), to_format(format));
    return PEERFL_OK;
  } catch (const std::exception& e) {
    return fail(PEERFL_ERR_IO, e.what());
  }
}

peerfl_status peerfl_result_format(const peerfl_result* result, peerfl_format format, char** out) {
  if (!result || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  if (!valid_format(format)) return fail(PEERFL_ERR_ARGUMENT, "unknown format");
  return guarded([&] {
    *out = dup_string(peerfl::format_metrics(result->sim.log, to_format(format)));
    return PEERFL_OK;
  });
}

peerfl_status peerfl_result_summary(const peerfl_result* result, peerfl_summary* out) {
  if (!result || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const auto s = peerfl::summarize(result->sim.log);
    out->devices = s.devices;
    out->rounds = s.rounds;
    out->final_mean_accuracy = s.final_mean_accuracy;
    out->total_sim_time = s.total_sim_time;
    out->total_bytes = s.total_bytes;
    out->messages = s.messages;
    out->drops = s.drops;
    out->warnings = s.warnings;
    out->comm_time = s.comm_time;
    out->compute_time = s.compute_time;
    out->stopped_early = result->sim.stopped_early ? 1 : 0;
    return PEERFL_OK;
  });
}

peerfl_status peerfl_result_summary_json(const peerfl_result* result, char** out) {
  if (!result || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(peerfl::summary_json(peerfl::summarize(result->sim.log)));
    return PEERFL_OK;
  });
}

size_t peerfl_result_record_count(const peerfl_result* result) { return result ? result->sim.log.size() : 0; }

peerfl_status peerfl_result_record(const peerfl_result* result, size_t index, peerfl_record* out) {
  if (!result || !out) return fail(PEERFL_ERR_ARGUMENT, "null argument");
  if (index >= result->sim.log.size()) return fail(PEERFL_ERR_ARGUMENT, "record index out of range");
  const auto& r = result->sim.log[index];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out->round = r.round;
  out->device = r.device;
  out->event = event_name(r.event);
  out->sim_time = r.sim_time;
  out->loss = r.loss.value_or(nan);
  out->accuracy = r.accuracy.value_or(nan);
  out->adv_accuracy = r.adv_accuracy.value_or(nan);
  out->bytes = r.bytes;
  out->peer = r.peer ? static_cast<int64_t>(*r.peer) : -1;
  out->duration = r.duration;
  return PEERFL_OK;
}

}  // extern "C"
