#pragma once

#include <string_view>

namespace specsense {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Read once from SPECSENSE_LOG (error|warn|info|debug, default warn).
LogLevel log_level();
void log_message(LogLevel level, std::string_view message);

}  // namespace specsense
