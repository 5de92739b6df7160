#pragma once

namespace aqmlab {

// Diagnostics go to stderr, gated by the AQMLAB_LOG environment variable
// (error | info | debug). Data output never goes through here.
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level();
bool log_enabled(LogLevel lvl);

#if defined(__GNUC__)
void log_msg(LogLevel lvl, const char* fmt, ...) __attribute__((format(printf, 2, 3)));
#else
void log_msg(LogLevel lvl, const char* fmt, ...);
#endif

} // namespace aqmlab
