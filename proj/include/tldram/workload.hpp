#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tldram/address_map.hpp"
#include "tldram/geometry.hpp"

namespace tldram {

// One trace line: `bubble R|W hex_address`. `bubble` non-memory instructions
// retire (one per cycle) before the access issues.
struct TraceRecord {
    uint32_t bubble = 0;
    bool is_write = false;
    uint64_t address = 0;
    bool has_access = true;  // bubble-only records exist for tests
};

std::vector<TraceRecord> parse_trace(std::istream& in);
void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace);

// Synthetic generators draw rows from a compact "workload row" index space
// g in [0, row_count). Spreading g across banks first, then subarrays, then
// rows keeps small hot sets bank-parallel:
//   bank = g % banks, subarray = (g / banks) % subarrays,
//   row  = row_offset + g / (banks * subarrays)
struct GenBase {
    uint64_t seed = 1;
    uint64_t n = 100000;
    uint32_t row_count = 64;
    uint32_t row_offset = 0;  // keep >= near rows to target the far segment
    double write_fraction = 0.2;
    double bubble_mean = 4.0;
};

struct HotColdParams : GenBase {
    uint32_t hot_row_count = 32;
    double hot_access_fraction = 0.9;
};

struct ZipfParams : GenBase {
    double exponent = 1.0;
};

// (bank, subarray, row) for workload row g
AddressMap::Decoded workload_row_place(const DeviceGeometry& g, uint32_t row_offset, uint64_t wrow);

std::vector<TraceRecord> gen_hotcold(const DeviceGeometry& geometry, const AddressMap& map,
                                     const HotColdParams& p);
std::vector<TraceRecord> gen_zipf(const DeviceGeometry& geometry, const AddressMap& map,
                                  const ZipfParams& p);

// Simple in-order front end: retires one bubble instruction per cycle, then
// issues the record's memory access and (with max_outstanding = 1) stalls
// until it completes. Memory ops count as one instruction, retired at
// completion.
class CoreModel {
public:
    enum class Step { IDLE, RETIRED_BUBBLE, WANT_ISSUE };

    CoreModel(uint32_t id, std::vector<TraceRecord> trace, uint32_t max_outstanding);

    Step tick(uint64_t now);
    const TraceRecord& current() const { return trace_[cursor_]; }
    void issue_accepted();
    void complete(uint64_t now);

    bool done() const { return cursor_ >= trace_.size() && outstanding_ == 0; }
    uint32_t id() const { return id_; }
    uint64_t retired_instructions() const { return retired_; }
    uint64_t finish_cycle() const { return finish_cycle_; }
    double ipc() const;

private:
    void skip_empty_records();

    uint32_t id_;
    std::vector<TraceRecord> trace_;
    size_t cursor_ = 0;
    bool loaded_ = false;
    uint64_t bubbles_left_ = 0;
    uint32_t outstanding_ = 0;
    uint32_t max_outstanding_;
    uint64_t retired_ = 0;
    uint64_t finish_cycle_ = 0;
};

}  // namespace tldram
