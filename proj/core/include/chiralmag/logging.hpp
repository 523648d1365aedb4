#pragma once

#include <string>
#include <string_view>

namespace chiralmag {

enum class LogLevel { Error, Info, Debug };

/// Reads CHIRALMAG_LOG (error, info, debug; default info). Returns false and
/// leaves the level at info if the variable holds anything else.
bool init_logging_from_env();
void set_log_level(LogLevel level);
LogLevel log_level();
/// Parses "error" / "info" / "debug".
bool parse_log_level(std::string_view text, LogLevel& out);

void log_error(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

} // namespace chiralmag
