#include "log.hpp"

#include <cstdlib>
#include <mutex>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace peerfl {
namespace {

spdlog::level::level_enum to_spdlog(LogLevel level) {
  switch (level) {
    case LogLevel::Off: return spdlog::level::off;
    case LogLevel::Error: return spdlog::level::err;
    case LogLevel::Warn: return spdlog::level::warn;
    case LogLevel::Info: return spdlog::level::info;
    case LogLevel::Debug: return spdlog::level::debug;
  }
  return spdlog::level::warn;
}

struct State {
  std::shared_ptr<spdlog::logger> logger;
  LogLevel level = LogLevel::Warn;
};

State& state() {
  static State s = [] {
    State st;
    st.logger = std::make_shared<spdlog::logger>("peerfl", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    st.logger->set_pattern("peerfl: %l: %v");
    if (const char* env = std::getenv("PEERFL_LOG")) parse_log_level(env, st.level);
    st.logger->set_level(to_spdlog(st.level));
    return st;
  }();
  return s;
}

}  // namespace

bool parse_log_level(const std::string& name, LogLevel& out) {
  if (name == "off") out = LogLevel::Off;
  else if (name == "error") out = LogLevel::Error;
  else if (name == "warn") out = LogLevel::Warn;
  else if (name == "info") out = LogLevel::Info;
  else if (name == "debug") out = LogLevel::Debug;
  else return false;
  return true;
}

void set_log_level(LogLevel level) {
  state().level = level;
  state().logger->set_level(to_spdlog(level));
}

LogLevel log_level() { return state().level; }

void log_error(const std::string& msg) { state().logger->error(msg); }
void log_warn(const std::string& msg) { state().logger->warn(msg); }
void log_info(const std::string& msg) { state().logger->info(msg); }
void log_debug(const std::string& msg) { state().logger->debug(msg); }

}  // namespace peerfl
