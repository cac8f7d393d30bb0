#pragma once

#include <stdexcept>
#include <string>

namespace tldram {

// Bad configuration value or inconsistent config combination. CLI exit 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed trace input or out-of-range address. CLI exit 1.
struct WorkloadError : std::runtime_error {
    explicit WorkloadError(const std::string& msg) : std::runtime_error(msg) {}
};

// DRAM command illegal in the current bank phase or issued too early.
// Indicates a simulator bug, not a workload problem. CLI exit 2.
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant (inconsistent reverse map, double completion, ...).
// CLI exit 2.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tldram
