#pragma once

#include <string_view>

namespace jpr {

enum class LogLevel { Debug, Info, Warning, Error, Off };

// Messages below the threshold are dropped. Everything goes to stderr.
void set_log_level(LogLevel level);
LogLevel log_level();
void log(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log(LogLevel::Info, m); }
inline void log_warning(std::string_view m) { log(LogLevel::Warning, m); }

}  // namespace jpr
