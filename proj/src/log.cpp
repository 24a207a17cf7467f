#include "fedlab/log.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>

namespace fedlab::log {

namespace {

Level parse_level() {
    const char* raw = std::getenv("FEDLAB_LOG");
    if (raw == nullptr || *raw == '\0') {
        return Level::Warn;
    }
    std::string value(raw);
    std::transform(value.begin(), value.end(), value.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (value == "off" || value == "0" || value == "none") return Level::Off;
    if (value == "warn" || value == "warning") return Level::Warn;
    if (value == "info") return Level::Info;
    if (value == "debug") return Level::Debug;
    return Level::Warn;
}

void emit(const char* tag, const std::string& msg) {
    std::cerr << "[fedlab " << tag << "] " << msg << '\n';
}

}  // namespace

Level level() {
    static const Level cached = parse_level();
    return cached;
}

void warn(const std::string& msg) {
    if (level() >= Level::Warn) emit("warn", msg);
}

void info(const std::string& msg) {
    if (level() >= Level::Info) emit("info", msg);
}

void debug(const std::string& msg) {
    if (level() >= Level::Debug) emit("debug", msg);
}

}  // namespace fedlab::log
