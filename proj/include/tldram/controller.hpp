#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "tldram/address_map.hpp"
#include "tldram/energy.hpp"
#include "tldram/policies.hpp"
#include "tldram/timing_engine.hpp"

namespace tldram {

struct MemRequest {
    uint64_t id = 0;
    uint32_t core = 0;
    uint64_t address = 0;
    bool is_write = false;
    uint64_t arrival = 0;
    std::optional<uint64_t> completion;

    // decoded location (logical row before any placement decision)
    uint32_t bank = 0;
    uint32_t subarray = 0;
    uint32_t logical_row = 0;
    uint32_t column = 0;

    // service state
    bool decided = false;
    uint32_t phys_row = 0;
    bool served_near = false;
    bool wants_migration = false;
    uint32_t victim_slot = 0;
    bool row_opened_by_self = false;
    uint64_t read_token = 0;  // valid after a read's column command issues
};

struct ControllerParams {
    uint64_t aging_cap = 10000;     // cycles before a request preempts row hits
    uint32_t queue_capacity = 64;   // shared across all bank queues
};

struct ControllerStats {
    uint64_t completed = 0;
    double latency_sum = 0;
    uint64_t max_latency = 0;
    std::vector<uint32_t> latency_samples;
    std::vector<uint64_t> per_core_completed;
    std::vector<double> per_core_latency_sum;
    uint64_t near_served = 0;
    uint64_t row_hits = 0;
    uint64_t migrations_decided = 0;
    uint64_t dirty_writebacks = 0;
    uint64_t mig_commands = 0;

    double mean_latency() const;
    double p95_latency() const;
};

// Request-level front end: per-bank queues, FR-FCFS with an aging cap, and
// the near-segment placement machinery. Owns no cores; the simulation loop
// feeds requests in and observes completions through callbacks.
class MemController {
public:
    using RequestFn = std::function<void(const MemRequest&, uint64_t)>;

    MemController(TimingEngine& engine, AddressMap map, ControllerParams params,
                  PolicyParams policy_params, const PageMapTable* page_map,
                  EnergyLedger* ledger, CalibrationAnchors anchors, uint32_t core_count);

    // false when the shared queue is full (the core retries next cycle)
    bool enqueue(uint64_t address, bool is_write, uint32_t core, uint64_t now);

    struct TickResult {
        bool issued = false;
        bool completed_any = false;
        uint64_t next_ready = UINT64_MAX;  // earliest future cycle anything can happen
    };
    TickResult tick(uint64_t now);

    bool idle() const;
    uint64_t queued() const { return total_queued_; }
    const ControllerStats& stats() const { return stats_; }

    void set_on_complete(RequestFn fn) { on_complete_ = std::move(fn); }
    void set_on_column(RequestFn fn) { on_column_ = std::move(fn); }

    void decay_policies();
    NearCachePolicy* policy_at(uint32_t bank, uint32_t subarray);
    bool caching_enabled() const { return !policies_.empty(); }

    static uint64_t write_token_for(uint64_t request_id);

private:
    struct MigrationOp {
        uint32_t subarray = 0;
        uint32_t far_row = 0;   // row being pulled into the near segment
        uint32_t slot = 0;
        bool need_writeback = false;
        uint32_t writeback_home = 0;
    };
    struct BankAux {
        std::vector<std::unique_ptr<MemRequest>> queue;
        uint32_t holders = 0;  // requests granted the open row, column pending
        std::optional<MigrationOp> op;
    };

    bool process_completions(uint64_t now);
    bool schedule(uint64_t now, uint64_t& next_ready);
    uint32_t tentative_phys_row(const MemRequest& req) const;
    void commit_decision(MemRequest& req, uint64_t now);
    std::optional<Command> next_command_for(const MemRequest& req) const;
    std::optional<Command> op_command_for(uint32_t bank) const;
    void issue(const Command& cmd, MemRequest* req, uint64_t now);
    void issue_op_command(uint32_t bank, const Command& cmd, uint64_t now);
    void finalize(std::unique_ptr<MemRequest> req, uint64_t cycle);
    void charge(const Command& cmd);

    TimingEngine& engine_;
    AddressMap map_;
    ControllerParams params_;
    PolicyParams policy_params_;
    const PageMapTable* page_map_;
    EnergyLedger* ledger_;
    CalibrationAnchors anchors_;
    std::vector<BankAux> banks_;
    std::vector<NearCachePolicy> policies_;  // bank-major, one per subarray
    std::multimap<uint64_t, std::unique_ptr<MemRequest>> completions_;
    uint64_t total_queued_ = 0;
    uint64_t next_id_ = 0;
    ControllerStats stats_;
    RequestFn on_complete_;
    RequestFn on_column_;
};

}  // namespace tldram
