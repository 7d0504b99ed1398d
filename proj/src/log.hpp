#pragma once

#include <string>

namespace peerfl {

enum class LogLevel { Off = 0, Error, Warn, Info, Debug };

/// Diagnostics go to stderr. The initial level comes from PEERFL_LOG
/// (off|error|warn|info|debug, default warn).
void set_log_level(LogLevel level);
LogLevel log_level();
bool parse_log_level(const std::string& name, LogLevel& out);

void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace peerfl
