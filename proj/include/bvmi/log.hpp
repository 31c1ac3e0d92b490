#pragma once

#include <sstream>
#include <string>

namespace bvmi::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Current verbosity. Initialized from the BVMI_LOG environment variable
// (error|warn|info|debug) on first use; defaults to warn.
Level level();
void set_level(Level lvl);

// Writes "[bvmi][<level>] <msg>" to stderr when lvl <= level().
void write(Level lvl, const std::string& msg);

namespace detail {
template <typename... Parts>
std::string concat(const Parts&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}
} // namespace detail

template <typename... Parts>
void error(const Parts&... parts) {
    write(Level::error, detail::concat(parts...));
}
template <typename... Parts>
void warn(const Parts&... parts) {
    write(Level::warn, detail::concat(parts...));
}
template <typename... Parts>
void info(const Parts&... parts) {
    write(Level::info, detail::concat(parts...));
}
template <typename... Parts>
void debug(const Parts&... parts) {
    write(Level::debug, detail::concat(parts...));
}

} // namespace bvmi::log
