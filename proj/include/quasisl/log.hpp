#ifndef QUASISL_LOG_HPP
#define QUASISL_LOG_HPP

#include <sstream>
#include <string>

namespace quasisl {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Global level; initialized from QUASI_SL_LOG (error|warn|info|debug).
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& msg);

namespace detail {
template <class... Args>
void log_fmt(LogLevel level, const Args&... args) {
  if (level > log_level()) return;
  std::ostringstream os;
  (os << ... << args);
  log_message(level, os.str());
}
}  // namespace detail

template <class... Args>
void log_error(const Args&... args) {
  detail::log_fmt(LogLevel::Error, args...);
}
template <class... Args>
void log_warn(const Args&... args) {
  detail::log_fmt(LogLevel::Warn, args...);
}
template <class... Args>
void log_info(const Args&... args) {
  detail::log_fmt(LogLevel::Info, args...);
}
template <class... Args>
void log_debug(const Args&... args) {
  detail::log_fmt(LogLevel::Debug, args...);
}

}  // namespace quasisl

#endif
