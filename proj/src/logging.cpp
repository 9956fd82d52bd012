#include "anchorloc/logging.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace anchorloc::log {

namespace {

Level read_level() {
  const char* raw = std::getenv("ANCHORLOC_LOG");
  if (raw == nullptr) return Level::Off;
  std::string value(raw);
  if (value == "debug" || value == "2") return Level::Debug;
  if (value == "info" || value == "1") return Level::Info;
  return Level::Off;
}

}  // namespace

Level level() {
  static const Level cached = read_level();
  return cached;
}

bool enabled(Level wanted) { return static_cast<int>(level()) >= static_cast<int>(wanted); }

void info(const std::string& message) {
  if (enabled(Level::Info)) std::fprintf(stderr, "[anchorloc] %s\n", message.c_str());
}

void debug(const std::string& message) {
  if (enabled(Level::Debug)) std::fprintf(stderr, "[anchorloc] %s\n", message.c_str());
}

}  // namespace anchorloc::log
