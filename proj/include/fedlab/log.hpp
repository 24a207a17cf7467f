#pragma once

#include <string>

namespace fedlab::log {

enum class Level { Off = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from the FEDLAB_LOG environment variable
// (off|warn|info|debug, default warn), read once per process.
Level level();

void warn(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace fedlab::log
