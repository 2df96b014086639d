#include "rodseg/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>

namespace rodseg {

namespace {

std::optional<LogLevel>& threshold() {
    static std::optional<LogLevel> level;
    return level;
}

LogLevel fromEnvironment() {
    const char* v = std::getenv("RODSEG_LOG_LEVEL");
    if (v == nullptr) return LogLevel::Warn;
    if (std::strcmp(v, "error") == 0) return LogLevel::Error;
    if (std::strcmp(v, "info") == 0) return LogLevel::Info;
    if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
}

const char* tag(LogLevel level) {
    switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warning";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    }
    return "";
}

} // namespace

LogLevel logLevel() {
    auto& t = threshold();
    if (!t) t = fromEnvironment();
    return *t;
}

void setLogLevel(LogLevel level) { threshold() = level; }

void logMessage(LogLevel level, const char* fmt, ...) {
    if (static_cast<int>(level) > static_cast<int>(logLevel())) return;
    std::fprintf(stderr, "%s: ", tag(level));
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

} // namespace rodseg
