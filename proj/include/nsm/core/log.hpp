#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace nsm {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

inline std::string_view to_string(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    case LogLevel::off: return "off";
  }
  return "unknown";
}

inline LogLevel parse_log_level(std::string_view name) {
  if (name == "debug") return LogLevel::debug;
  if (name == "info") return LogLevel::info;
  if (name == "warn" || name == "warning") return LogLevel::warn;
  if (name == "error") return LogLevel::error;
  if (name == "off") return LogLevel::off;
  throw std::invalid_argument("unknown log level: " + std::string(name));
}

/**
 * @brief Process-wide diagnostic channel.
 *
 * Library code reports recoverable anomalies (dropped rows, degenerate
 * segments) here. The default sink writes to stderr; tests install a
 * capturing sink.
 */
class Log {
 public:
  using Sink = std::function<void(LogLevel, std::string_view)>;

  static void set_level(LogLevel level) {
    std::lock_guard lock(state().mutex);
    state().level = level;
  }

  static LogLevel level() {
    std::lock_guard lock(state().mutex);
    return state().level;
  }

  /// Pass an empty function to restore the stderr sink.
  static void set_sink(Sink sink) {
    std::lock_guard lock(state().mutex);
    state().sink = std::move(sink);
  }

  static void write(LogLevel level, std::string_view message) {
    std::lock_guard lock(state().mutex);
    if (level < state().level || level == LogLevel::off) return;
    if (state().sink) {
      state().sink(level, message);
    } else {
      std::cerr << "[nsm " << to_string(level) << "] " << message << '\n';
    }
  }

 private:
  struct State {
    std::mutex mutex;
    LogLevel level = LogLevel::warn;
    Sink sink;
  };
  static State& state() {
    static State s;
    return s;
  }
};

inline void log_debug(std::string_view m) { Log::write(LogLevel::debug, m); }
inline void log_info(std::string_view m) { Log::write(LogLevel::info, m); }
inline void log_warn(std::string_view m) { Log::write(LogLevel::warn, m); }

}  // namespace nsm
