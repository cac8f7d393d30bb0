#pragma once

#include <cstdint>
#include <vector>

namespace tldram {

// One bitline segment. Tier 0 sits directly on the sense amplifiers; tier i
// is reached through i isolation transistors.
struct TierSpec {
    uint32_t cells_in_segment = 0;
    uint32_t isolation_transistors_to_amp = 0;
    // cells in this segment plus all segments between it and the amplifier
    uint32_t connected_cells_when_accessed = 0;
};

struct DeviceGeometry {
    std::vector<TierSpec> tiers;  // index 0 = near segment
    uint32_t rows_per_subarray = 0;
    uint32_t subarrays_per_bank = 1;
    uint32_t banks = 1;
    uint32_t columns_per_row = 64;
    uint32_t bytes_per_column = 8;

    // Builds a geometry from per-tier cell counts; rows_per_subarray is the
    // total cells per bitline (one row per cell).
    static DeviceGeometry make(const std::vector<uint32_t>& tier_cells,
                               uint32_t subarrays_per_bank, uint32_t banks,
                               uint32_t columns_per_row, uint32_t bytes_per_column);

    uint32_t total_cells_per_bitline() const;
    uint32_t tier_count() const { return static_cast<uint32_t>(tiers.size()); }
    uint32_t near_rows() const { return tiers.empty() ? 0 : tiers[0].cells_in_segment; }
    // tier index the given row belongs to
    uint32_t tier_of_row(uint32_t row) const;
    uint64_t total_rows() const;
    uint64_t capacity_bytes() const;
    void validate() const;  // throws ConfigError
};

// The calibration anchor points: measured tRC / normalized power / normalized
// die size for the short (32-cell), long (512-cell) and segmented (32+480)
// organizations.
struct CalibrationAnchors {
    double short_cells = 32.0;
    double long_cells = 512.0;
    double trc_short_ns = 23.1;
    double trc_long_ns = 52.5;
    double trc_far_ns = 65.8;  // 480-cell far segment behind one isolation transistor
    double power_short = 0.51;
    double power_long = 1.00;
    double power_far = 1.49;
    double die_short = 3.76;
    double die_long = 1.00;
    double die_segmented = 1.03;
    double migration_extra_ns = 4.0;  // inter-segment transfer cost over tRC
    double die_per_extra_tier = 0.03;

    void validate() const;
};

// How the single tRC number is split into the individual timing constraints.
struct DecompositionRatios {
    double tras_frac = 0.7;
    double trp_frac = 0.3;
    double trcd_frac = 0.3;
    double tcl_ns = 13.1;
    double twr_ns = 15.0;
    double tccd_ns = 5.0;

    void validate() const;  // requires tras_frac + trp_frac == 1
};

struct TimingParams {
    double trc_ns = 0;
    double tras_ns = 0;
    double trp_ns = 0;
    double trcd_ns = 0;
    double tcl_ns = 0;
    double twr_ns = 0;
    double tccd_ns = 0;
    double tmig_ns = 0;
};

// Integer-cycle timing constraints (ceiling-converted at the controller clock).
struct TimingCycles {
    uint64_t trc = 0;
    uint64_t tras = 0;
    uint64_t trp = 0;
    uint64_t trcd = 0;
    uint64_t tcl = 0;
    uint64_t twr = 0;
    uint64_t tccd = 0;
    uint64_t tmig = 0;
};

// Row-cycle time of a tier: affine in connected cells, plus a fixed penalty
// per isolation transistor in series.
double trc_of_tier(const DeviceGeometry& geometry, uint32_t tier_index,
                   const CalibrationAnchors& anchors);

// Normalized activation energy of a tier: affine in connected cells plus a
// toggle cost per isolation transistor.
double power_of_tier(const DeviceGeometry& geometry, uint32_t tier_index,
                     const CalibrationAnchors& anchors);

// Normalized die size: sense-amplifier amortization term (alpha + beta/cells)
// plus a flat overhead per extra tier.
double die_size(const DeviceGeometry& geometry, const CalibrationAnchors& anchors);

struct TradeoffRow {
    uint32_t cells;
    double trc_ns;
    double trcd_ns;
    double die_norm;
    double power_norm;
};

// Latency/power/area of single-tier organizations at the given bitline lengths.
std::vector<TradeoffRow> tradeoff_table(const std::vector<uint32_t>& cell_counts,
                                        const CalibrationAnchors& anchors);

TimingParams timing_params_for(const DeviceGeometry& geometry, uint32_t tier_index,
                               const CalibrationAnchors& anchors,
                               const DecompositionRatios& decomposition);

uint64_t ns_to_cycles(double ns, double cycle_ns);
TimingCycles to_cycles(const TimingParams& params, double cycle_ns);

}  // namespace tldram
