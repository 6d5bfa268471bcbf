#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace occusense {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold comes from OCCUSENSE_LOG (error|warn|info|debug), default warn.
inline LogLevel& log_threshold() {
  static LogLevel level = [] {
    const char* env = std::getenv("OCCUSENSE_LOG");
    if (env == nullptr) return LogLevel::warn;
    const std::string_view v(env);
    if (v == "error") return LogLevel::error;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& msg) {
  if (level > log_threshold()) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "occusense %s: %s\n", names[static_cast<int>(level)], msg.c_str());
}

inline void log_error(const std::string& msg) { log_message(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }

}  // namespace occusense
