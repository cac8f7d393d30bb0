#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tldram/geometry.hpp"

namespace tldram {

enum class CommandKind : uint8_t { ACT = 0, RD, WR, PRE, MIG };

const char* to_string(CommandKind kind);
std::optional<CommandKind> command_kind_from_string(const std::string& s);

struct Command {
    CommandKind kind = CommandKind::ACT;
    uint32_t bank = 0;
    uint32_t subarray = 0;
    uint32_t row = 0;      // MIG: source row; PRE: row being closed
    uint32_t row2 = 0;     // MIG: destination row (same subarray, different tier)
    uint32_t column = 0;   // RD/WR only
    uint64_t write_token = 0;  // payload for WR

    static Command act(uint32_t bank, uint32_t subarray, uint32_t row);
    static Command rd(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column);
    static Command wr(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column,
                      uint64_t token);
    static Command pre(uint32_t bank);
    static Command mig(uint32_t bank, uint32_t subarray, uint32_t src_row, uint32_t dst_row);
};

struct TimedCommand {
    uint64_t cycle = 0;
    Command cmd;
};

enum class BankPhase : uint8_t { PRECHARGED, ACTIVATING, ACTIVE, PRECHARGING, MIGRATING };

struct BankState {
    BankPhase phase = BankPhase::PRECHARGED;
    bool has_open_row = false;
    uint32_t open_subarray = 0;
    uint32_t open_row = 0;
    uint32_t open_tier = 0;
    // earliest legal issue cycle per command kind; never decreases
    std::array<uint64_t, 5> earliest{};
    uint64_t busy_until = 0;   // MIG occupancy
    uint64_t active_at = 0;    // ACTIVATING -> ACTIVE
    uint64_t precharged_at = 0;  // PRECHARGING -> PRECHARGED

    // promote time-driven phase transitions up to `now`
    void settle(uint64_t now);
};

// Row contents as opaque 64-bit tokens, one per column. Untouched rows hold a
// deterministic pattern derived from the data seed, so any row can be read
// without prior initialization.
class DataStore {
public:
    DataStore(const DeviceGeometry& geometry, uint64_t seed);

    uint64_t read(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column) const;
    void write(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column, uint64_t token);
    void copy_row(uint32_t bank, uint32_t subarray, uint32_t src_row, uint32_t dst_row);
    std::vector<uint64_t> row_image(uint32_t bank, uint32_t subarray, uint32_t row) const;

private:
    uint64_t key(uint32_t bank, uint32_t subarray, uint32_t row) const;
    uint64_t pristine(uint64_t row_key, uint32_t column) const;
    std::vector<uint64_t>& materialize(uint64_t row_key);

    uint32_t subarrays_;
    uint32_t rows_;
    uint32_t columns_;
    uint64_t seed_;
    mutable std::unordered_map<uint64_t, std::vector<uint64_t>> rows_map_;
};

struct ApplyResult {
    uint64_t completion = 0;
    uint64_t read_token = 0;  // valid for RD only
};

// Deterministic command-level DRAM state machine. One instance per channel;
// commands share the channel at one per cycle, all other constraints are
// per bank.
class TimingEngine {
public:
    TimingEngine(DeviceGeometry geometry, std::vector<TimingCycles> per_tier, uint64_t data_seed);

    // smallest cycle >= now at which cmd violates no timing constraint;
    // throws ProtocolError if cmd is illegal in the current phase outright
    uint64_t earliest_issue(const Command& cmd, uint64_t now) const;

    // issue cmd at `now` (must satisfy earliest_issue) and apply its effects
    ApplyResult apply(const Command& cmd, uint64_t now);

    const DeviceGeometry& geometry() const { return geometry_; }
    const TimingCycles& timings(uint32_t tier) const { return per_tier_[tier]; }
    uint64_t mig_cycles(uint32_t tier_a, uint32_t tier_b) const;
    const BankState& bank(uint32_t b) const { return banks_[b]; }
    DataStore& store() { return store_; }
    const DataStore& store() const { return store_; }

    const std::vector<TimedCommand>& trace() const { return trace_; }
    void set_trace_recording(bool on) { record_trace_ = on; }

private:
    void check_structure(const Command& cmd) const;
    void check_phase(const BankState& bank, const Command& cmd) const;

    DeviceGeometry geometry_;
    std::vector<TimingCycles> per_tier_;
    std::vector<BankState> banks_;
    DataStore store_;
    bool channel_used_ = false;
    uint64_t last_issue_ = 0;
    bool record_trace_ = true;
    std::vector<TimedCommand> trace_;
};

struct Violation {
    size_t first = 0;   // index of the earlier command (== second for unary checks)
    size_t second = 0;  // index of the offending command
    std::string constraint;
};

// Brute-force re-check of a command trace against the timing constraints.
// Independent of TimingEngine's incremental state machine: every relevant
// command pair is re-examined from the raw trace.
std::vector<Violation> validate_command_trace(const std::vector<TimedCommand>& trace,
                                              const DeviceGeometry& geometry,
                                              const std::vector<TimingCycles>& per_tier);

// One line per command: `cycle kind bank subarray row [row2|col]`.
void dump_command_trace(std::ostream& out, const std::vector<TimedCommand>& trace);
std::vector<TimedCommand> parse_command_trace(std::istream& in);

}  // namespace tldram
