#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tldram/config.hpp"
#include "tldram/controller.hpp"
#include "tldram/energy.hpp"
#include "tldram/timing_engine.hpp"
#include "tldram/workload.hpp"

namespace tldram {

inline constexpr const char* kSimVersion = "0.1.0";
// stream id for deriving the engine's data-pattern seed from the config seed
inline constexpr uint64_t kDataSeedStream = 0x0da7a;
inline constexpr const char* kCsvSchemaHeader = "# tldram-sim schema v1";

struct StatsReport {
    std::string version = kSimVersion;
    uint64_t seed = 0;
    std::string config_echo;
    uint64_t requests = 0;
    uint64_t elapsed_cycles = 0;
    std::vector<double> core_ipc;
    double mean_latency = 0;
    double p95_latency = 0;
    double near_fraction = 0;
    double row_hit_rate = 0;
    uint64_t migrations = 0;
    uint64_t dirty_writebacks = 0;
    uint64_t max_latency = 0;
    EnergyLedger energy;

    double total_ipc() const;
    // deterministic text form; no timestamps, byte-identical across runs
    std::string body() const;
};

struct RunHooks {
    MemController::RequestFn on_column;
    MemController::RequestFn on_complete;
    bool record_trace = false;
};

struct RunOutput {
    StatsReport report;
    std::vector<TimedCommand> trace;  // populated when record_trace is set
    ControllerStats controller_stats;
};

RunOutput run(const RunConfig& config, const RunHooks& hooks = {});

struct SweepRow {
    uint32_t size = 0;
    double ipc = 0;
    double mean_latency = 0;
    double near_fraction = 0;
};

// One run per near-segment size (shared seed/trace). Resizing the near
// segment rescales its latency through the geometry model: more near rows
// mean a longer near bitline.
std::vector<SweepRow> sweep_near_size(const RunConfig& config,
                                      const std::vector<uint32_t>& sizes);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct CompareReport {
    StatsReport baseline;  // config_a
    StatsReport candidate;  // config_b
    double ipc_delta_pct = 0;
    double latency_delta = 0;
    double weighted_speedup = 0;  // sum over cores of IPC_b / IPC_a
    std::optional<double> energy_savings;

    std::string body() const;
};

// config_a is the baseline; both configs must share trace source and seed.
CompareReport compare(const RunConfig& config_a, const RunConfig& config_b);

// Access counts per global row id for the configured trace (the profiling
// side of profile-guided mapping).
std::map<uint64_t, uint64_t> profile_counts(const RunConfig& config);

std::string tradeoff_csv(const std::vector<uint32_t>& cell_counts);

// the per-core traces a config describes (derived per-core seeds)
std::vector<std::vector<TraceRecord>> build_traces(const RunConfig& config);

}  // namespace tldram
