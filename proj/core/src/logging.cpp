#include "chiralmag/logging.hpp"

#include "chiralmag/errors.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

namespace chiralmag {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::NonPositiveDeterminant: return "NonPositiveDeterminant";
  case ErrorCode::ZeroVectorNode: return "ZeroVectorNode";
  case ErrorCode::DegenerateMagnetization: return "DegenerateMagnetization";
  case ErrorCode::DegenerateGrid: return "DegenerateGrid";
  case ErrorCode::InvalidGrid: return "InvalidGrid";
  case ErrorCode::InvalidMaterial: return "InvalidMaterial";
  case ErrorCode::BoundaryViolation: return "BoundaryViolation";
  case ErrorCode::OnBoundaryImage: return "OnBoundaryImage";
  case ErrorCode::NonIntegerWinding: return "NonIntegerWinding";
  case ErrorCode::MissingPreimage: return "MissingPreimage";
  case ErrorCode::GridMismatch: return "GridMismatch";
  case ErrorCode::DomainEscaped: return "DomainEscaped";
  case ErrorCode::LineSearchStalled: return "LineSearchStalled";
  case ErrorCode::StepFailed: return "StepFailed";
  case ErrorCode::CertificationFailed: return "CertificationFailed";
  case ErrorCode::UnknownFixture: return "UnknownFixture";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

// Logs go to stderr so that stdout stays machine readable.
spdlog::logger& sink() {
  static auto logger = [] {
    auto l = std::make_shared<spdlog::logger>("chiralmag", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::info);
    return l;
  }();
  return *logger;
}

LogLevel g_level = LogLevel::Info;

} // namespace

bool parse_log_level(std::string_view text, LogLevel& out) {
  if (text == "error") out = LogLevel::Error;
  else if (text == "info") out = LogLevel::Info;
  else if (text == "debug") out = LogLevel::Debug;
  else return false;
  return true;
}

void set_log_level(LogLevel level) {
  g_level = level;
  switch (level) {
  case LogLevel::Error: sink().set_level(spdlog::level::err); break;
  case LogLevel::Info: sink().set_level(spdlog::level::info); break;
  case LogLevel::Debug: sink().set_level(spdlog::level::debug); break;
  }
}

LogLevel log_level() { return g_level; }

bool init_logging_from_env() {
  const char* env = std::getenv("CHIRALMAG_LOG");
  if (!env) {
    set_log_level(LogLevel::Info);
    return true;
  }
  LogLevel level;
  if (!parse_log_level(env, level)) {
    set_log_level(LogLevel::Info);
    return false;
  }
  set_log_level(level);
  return true;
}

void log_error(const std::string& message) { sink().error(message); }
void log_info(const std::string& message) { sink().info(message); }
void log_debug(const std::string& message) { sink().debug(message); }

} // namespace chiralmag
