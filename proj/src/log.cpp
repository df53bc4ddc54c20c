#include "rcnkit/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace rcnkit {
namespace {

LogLevel g_level = [] {
  const char* env = std::getenv("RCNKIT_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  if (std::strcmp(env, "error") == 0) return LogLevel::kError;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  return LogLevel::kInfo;
}();

}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel level) { g_level = level; }

void log_error(const std::string& msg) {
  std::fprintf(stderr, "[error] %s\n", msg.c_str());
}

void log_info(const std::string& msg) {
  if (g_level >= LogLevel::kInfo) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (g_level >= LogLevel::kDebug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace rcnkit
