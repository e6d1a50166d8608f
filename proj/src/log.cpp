#include "specsense/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace specsense {

namespace {

LogLevel parse_level(const char* text) {
  if (text == nullptr) return LogLevel::warn;
  const std::string s(text);
  if (s == "error") return LogLevel::error;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

constexpr const char* kTags[] = {"error", "warn", "info", "debug"};

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level(std::getenv("SPECSENSE_LOG"));
  return level;
}

void log_message(LogLevel level, std::string_view message) {
  if (level > log_level()) return;
  const std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[specsense " << kTags[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace specsense
