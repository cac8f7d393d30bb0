#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tldram/controller.hpp"
#include "tldram/geometry.hpp"
#include "tldram/policies.hpp"

namespace tldram {

enum class TraceKind { HOTCOLD, ZIPF, FILE };

// Flat `key = value` configuration with dotted section prefixes. Every field
// has a validated default; serialize() round-trips losslessly.
struct RunConfig {
    // geometry
    uint32_t near_cells = 32;
    uint32_t far_cells = 480;  // 0 = single-tier (conventional DRAM)
    uint32_t banks = 8;
    uint32_t subarrays_per_bank = 4;
    uint32_t columns_per_row = 64;
    uint32_t bytes_per_column = 8;

    // timing
    double cycle_ns = 1.25;
    DecompositionRatios decomposition;

    // policy
    PolicyParams policy;
    std::string profile_file;  // non-empty enables profile-guided page mapping
    uint64_t profile_map_size = 32;

    // controller
    ControllerParams controller;
    double rdwr_energy_cost = 0.1;

    // cores
    uint32_t core_count = 1;
    uint32_t max_outstanding = 1;

    // trace
    TraceKind trace_kind = TraceKind::HOTCOLD;
    std::string trace_file;
    uint64_t trace_n = 100000;
    uint32_t trace_row_count = 64;
    uint32_t trace_row_offset = 32;
    uint32_t trace_hot_rows = 32;
    double trace_hot_fraction = 0.9;
    double trace_write_fraction = 0.2;
    double trace_bubble_mean = 4.0;
    double trace_zipf_exponent = 1.0;

    uint64_t seed = 1;

    DeviceGeometry geometry() const;
    void validate() const;

    // canonical text form, sorted keys
    std::string serialize() const;
    static RunConfig parse(std::istream& in);
    static RunConfig parse_string(const std::string& text);
    static RunConfig load_file(const std::string& path);

    // true when both configs replay the same request stream
    bool same_trace_source(const RunConfig& other) const;
};

}  // namespace tldram
