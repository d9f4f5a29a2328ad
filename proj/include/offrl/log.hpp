#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace offrl::log {

enum class Level { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from OFFRL_LOG (quiet|warn|info|debug), default warn.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("OFFRL_LOG");
        if (env == nullptr) return Level::Warn;
        const std::string v(env);
        if (v == "quiet") return Level::Quiet;
        if (v == "info") return Level::Info;
        if (v == "debug") return Level::Debug;
        return Level::Warn;
    }();
    return lvl;
}

inline void warn(const std::string& msg) {
    if (level() >= Level::Warn) std::cerr << "[offrl warn] " << msg << "\n";
}

inline void info(const std::string& msg) {
    if (level() >= Level::Info) std::cerr << "[offrl info] " << msg << "\n";
}

inline void debug(const std::string& msg) {
    if (level() >= Level::Debug) std::cerr << "[offrl debug] " << msg << "\n";
}

}  // namespace offrl::log
