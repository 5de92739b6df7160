#include "aqmlab/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace aqmlab {

static LogLevel parse_env() {
    const char* v = std::getenv("AQMLAB_LOG");
    if (!v) return LogLevel::Error;
    if (std::strcmp(v, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(v, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
}

LogLevel log_level() {
    static LogLevel lvl = parse_env();
    return lvl;
}

bool log_enabled(LogLevel lvl) { return static_cast<int>(lvl) <= static_cast<int>(log_level()); }

void log_msg(LogLevel lvl, const char* fmt, ...) {
    if (!log_enabled(lvl)) return;
    static const char* names[] = {"error", "info", "debug"};
    std::fprintf(stderr, "[aqmlab %s] ", names[static_cast<int>(lvl)]);
    va_list ap;
    va_start(ap, fmt);
    std::vfprintf(stderr, fmt, ap);
    va_end(ap);
    std::fputc('\n', stderr);
}

} // namespace aqmlab
