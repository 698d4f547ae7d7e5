#include "cqarank/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace cqarank::log {
namespace {

std::atomic<Level> g_level{Level::kInfo};
std::mutex g_mutex;

const char* tag(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warning";
    case Level::kError: return "error";
    case Level::kOff: break;
  }
  return "";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void write(Level level, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[cqarank " << tag(level) << "] " << message << '\n';
}

}  // namespace cqarank::log
