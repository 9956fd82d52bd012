#pragma once

#include <string>

namespace anchorloc::log {

// Controlled by ANCHORLOC_LOG: unset/"off"/"0" silent, "info"/"1" progress,
// "debug"/"2" verbose. Read once per process.
enum class Level { Off = 0, Info = 1, Debug = 2 };

Level level();
bool enabled(Level wanted);
void info(const std::string& message);
void debug(const std::string& message);

}  // namespace anchorloc::log
