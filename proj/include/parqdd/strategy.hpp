#pragma once

#include <optional>
#include <string_view>

#include "parqdd/opcache.hpp"

namespace parqdd {

enum class Strategy {
    SEQUENTIAL,
    OUTER_LINEAR,  // one task per gate application
    OUTER_ASSOC,   // segment products built as balanced trees, then applied
    OUTER_REDUCE,  // batched products with a barrier after each application
    INNER_THREADS, // recursion children as preemptive-thread tasks
    INNER_FIBERS,  // recursion children as work-stealing fibers
};

enum class UniqueScope { GLOBAL, PER_WORKER };

enum class RunStatus { OK, TIMEOUT, OOM };

inline const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::SEQUENTIAL: return "sequential";
    case Strategy::OUTER_LINEAR: return "outer-linear";
    case Strategy::OUTER_ASSOC: return "outer-assoc";
    case Strategy::OUTER_REDUCE: return "outer-reduce";
    case Strategy::INNER_THREADS: return "inner-threads";
    case Strategy::INNER_FIBERS: return "inner-fibers";
    }
    return "?";
}

inline const char* to_string(CacheScope s) {
    switch (s) {
    case CacheScope::NONE: return "none";
    case CacheScope::LOCAL: return "local";
    case CacheScope::GLOBAL: return "global";
    }
    return "?";
}

inline const char* to_string(UniqueScope s) {
    return s == UniqueScope::GLOBAL ? "global" : "worker";
}

inline const char* to_string(RunStatus s) {
    switch (s) {
    case RunStatus::OK: return "ok";
    case RunStatus::TIMEOUT: return "timeout";
    case RunStatus::OOM: return "oom";
    }
    return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
    if (s == "sequential") return Strategy::SEQUENTIAL;
    if (s == "outer-linear") return Strategy::OUTER_LINEAR;
    if (s == "outer-assoc") return Strategy::OUTER_ASSOC;
    if (s == "outer-reduce") return Strategy::OUTER_REDUCE;
    if (s == "inner-threads") return Strategy::INNER_THREADS;
    if (s == "inner-fibers") return Strategy::INNER_FIBERS;
    return std::nullopt;
}

inline std::optional<CacheScope> parse_cache_scope(std::string_view s) {
    if (s == "none") return CacheScope::NONE;
    if (s == "local") return CacheScope::LOCAL;
    if (s == "global") return CacheScope::GLOBAL;
    return std::nullopt;
}

inline std::optional<UniqueScope> parse_unique_scope(std::string_view s) {
    if (s == "global") return UniqueScope::GLOBAL;
    if (s == "worker") return UniqueScope::PER_WORKER;
    return std::nullopt;
}

} // namespace parqdd
