#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tldram/geometry.hpp"
#include "tldram/timing_engine.hpp"

namespace tldram {

// Normalized access energy, accumulated per command. Activation-centric:
// background power and refresh are out of scope, so "power savings" here is
// energy-per-run savings at equal work.
struct EnergyLedger {
    double activation_energy = 0;
    double migration_energy = 0;
    double rdwr_energy = 0;
    std::vector<uint64_t> activations_per_tier;
    double rdwr_cost = 0.1;  // flat per-column-command cost, configurable

    double total() const { return activation_energy + migration_energy + rdwr_energy; }

    // ACT: activation factor of the opened tier. MIG: factor of the slower
    // (farther) participant, since the transfer drives the full bitline with
    // the isolation transistor on. RD/WR: flat cost. PRE: free.
    void charge(const Command& cmd, const DeviceGeometry& geometry,
                const CalibrationAnchors& anchors);

    EnergyLedger& operator+=(const EnergyLedger& other);
};

// (baseline_total - total) / baseline_total; absent when the baseline did
// no work.
std::optional<double> savings_vs(const EnergyLedger& ledger, const EnergyLedger& baseline);

}  // namespace tldram
