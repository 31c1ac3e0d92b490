#include "bvmi/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace bvmi::log {

namespace {

Level parse_env() {
    const char* raw = std::getenv("BVMI_LOG");
    if (raw == nullptr) return Level::warn;
    if (std::strcmp(raw, "error") == 0) return Level::error;
    if (std::strcmp(raw, "warn") == 0) return Level::warn;
    if (std::strcmp(raw, "info") == 0) return Level::info;
    if (std::strcmp(raw, "debug") == 0) return Level::debug;
    return Level::warn;
}

std::atomic<int>& level_storage() {
    static std::atomic<int> lvl{static_cast<int>(parse_env())};
    return lvl;
}

const char* name(Level lvl) {
    switch (lvl) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

} // namespace

Level level() { return static_cast<Level>(level_storage().load()); }

void set_level(Level lvl) { level_storage().store(static_cast<int>(lvl)); }

void write(Level lvl, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(level())) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::fprintf(stderr, "[bvmi][%s] %s\n", name(lvl), msg.c_str());
}

} // namespace bvmi::log
