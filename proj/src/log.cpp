#include "ccovoxel/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace ccv {

namespace {
std::mutex g_log_mutex;
std::atomic<LogLevel> g_level{LogLevel::Warning};
}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warning(const std::string& message) {
  if (g_level < LogLevel::Warning) return;
  std::lock_guard lock(g_log_mutex);
  std::fprintf(stderr, "[ccovoxel] warning: %s\n", message.c_str());
}

void log_info(const std::string& message) {
  if (g_level < LogLevel::Info) return;
  std::lock_guard lock(g_log_mutex);
  std::fprintf(stderr, "[ccovoxel] %s\n", message.c_str());
}

}  // namespace ccv
