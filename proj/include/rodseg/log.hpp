/**
 * @file log.hpp
 * @brief Leveled diagnostics on stderr. The threshold comes from the
 *        RODSEG_LOG_LEVEL environment variable (error, warn, info, debug).
 */

#pragma once

namespace rodseg {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Current threshold; read from the environment on first use, default warn.
LogLevel logLevel();
void setLogLevel(LogLevel level);

/// printf-style message, dropped when `level` is above the threshold.
void logMessage(LogLevel level, const char* fmt, ...) __attribute__((format(printf, 2, 3)));

} // namespace rodseg
