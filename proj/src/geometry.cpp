#include "tldram/geometry.hpp"

#include <cmath>
#include <string>

#include "tldram/errors.hpp"

namespace tldram {

DeviceGeometry DeviceGeometry::make(const std::vector<uint32_t>& tier_cells,
                                    uint32_t subarrays_per_bank, uint32_t banks,
                                    uint32_t columns_per_row, uint32_t bytes_per_column) {
    DeviceGeometry g;
    uint32_t connected = 0;
    for (size_t i = 0; i < tier_cells.size(); ++i) {
        TierSpec t;
        t.cells_in_segment = tier_cells[i];
        t.isolation_transistors_to_amp = static_cast<uint32_t>(i);
        connected += tier_cells[i];
        t.connected_cells_when_accessed = connected;
        g.tiers.push_back(t);
    }
    g.rows_per_subarray = connected;
    g.subarrays_per_bank = subarrays_per_bank;
    g.banks = banks;
    g.columns_per_row = columns_per_row;
    g.bytes_per_column = bytes_per_column;
    g.validate();
    return g;
}

uint32_t DeviceGeometry::total_cells_per_bitline() const {
    uint32_t total = 0;
    for (const auto& t : tiers) total += t.cells_in_segment;
    return total;
}

uint32_t DeviceGeometry::tier_of_row(uint32_t row) const {
    uint32_t upper = 0;
    for (uint32_t i = 0; i < tiers.size(); ++i) {
        upper += tiers[i].cells_in_segment;
        if (row < upper) return i;
    }
    throw ConfigError("row " + std::to_string(row) + " out of range (rows per subarray = " +
                      std::to_string(rows_per_subarray) + ")");
}

uint64_t DeviceGeometry::total_rows() const {
    return static_cast<uint64_t>(banks) * subarrays_per_bank * rows_per_subarray;
}

uint64_t DeviceGeometry::capacity_bytes() const {
    return total_rows() * columns_per_row * bytes_per_column;
}

void DeviceGeometry::validate() const {
    if (tiers.empty()) throw ConfigError("geometry needs at least one tier");
    uint32_t connected = 0;
    for (size_t i = 0; i < tiers.size(); ++i) {
        const auto& t = tiers[i];
        if (t.cells_in_segment < 1)
            throw ConfigError("tier " + std::to_string(i) + " has zero cells");
        connected += t.cells_in_segment;
        if (t.connected_cells_when_accessed != connected)
            throw ConfigError("tier " + std::to_string(i) + " connected-cell count inconsistent");
        if (t.isolation_transistors_to_amp != i)
            throw ConfigError("tier " + std::to_string(i) + " isolation transistor count must equal tier index");
    }
    if (rows_per_subarray != connected)
        throw ConfigError("rows_per_subarray must equal total cells per bitline");
    if (subarrays_per_bank < 1 || banks < 1 || columns_per_row < 1 || bytes_per_column < 1)
        throw ConfigError("geometry dimensions must be >= 1");
}

void CalibrationAnchors::validate() const {
    if (trc_short_ns <= 0 || trc_long_ns <= 0 || trc_far_ns <= 0 || power_short <= 0 ||
        power_long <= 0 || power_far <= 0 || die_short <= 0 || die_long <= 0 ||
        die_segmented <= 0)
        throw ConfigError("calibration anchors must be strictly positive");
    if (!(trc_short_ns < trc_long_ns && trc_long_ns < trc_far_ns))
        throw ConfigError("calibration requires trc_short < trc_long < trc_far");
    if (!(power_short < power_long && power_long < power_far))
        throw ConfigError("calibration requires power_short < power_long < power_far");
}

void DecompositionRatios::validate() const {
    if (std::abs(tras_frac + trp_frac - 1.0) > 1e-9)
        throw ConfigError("timing decomposition requires tras_frac + trp_frac = 1");
    if (tras_frac <= 0 || trp_frac <= 0 || trcd_frac <= 0)
        throw ConfigError("timing decomposition fractions must be positive");
    if (tcl_ns < 0 || twr_ns < 0 || tccd_ns < 0)
        throw ConfigError("fixed timing parameters must be non-negative");
}

namespace {

void check_tier(const DeviceGeometry& g, uint32_t tier_index) {
    if (tier_index >= g.tier_count())
        throw ConfigError("tier index " + std::to_string(tier_index) + " out of range (geometry has " +
                          std::to_string(g.tier_count()) + " tiers)");
}

// line through (x0,y0) and (x1,y1) evaluated at x
double affine(double x0, double y0, double x1, double y1, double x) {
    double slope = (y1 - y0) / (x1 - x0);
    return y0 + slope * (x - x0);
}

}  // namespace

double trc_of_tier(const DeviceGeometry& geometry, uint32_t tier_index,
                   const CalibrationAnchors& a) {
    check_tier(geometry, tier_index);
    const TierSpec& t = geometry.tiers[tier_index];
    double base = affine(a.short_cells, a.trc_short_ns, a.long_cells, a.trc_long_ns,
                         t.connected_cells_when_accessed);
    double iso_penalty = a.trc_far_ns - a.trc_long_ns;
    return base + iso_penalty * t.isolation_transistors_to_amp;
}

double power_of_tier(const DeviceGeometry& geometry, uint32_t tier_index,
                     const CalibrationAnchors& a) {
    check_tier(geometry, tier_index);
    const TierSpec& t = geometry.tiers[tier_index];
    double base = affine(a.short_cells, a.power_short, a.long_cells, a.power_long,
                         t.connected_cells_when_accessed);
    double toggle_cost = a.power_far - a.power_long;
    return base + toggle_cost * t.isolation_transistors_to_amp;
}

double die_size(const DeviceGeometry& geometry, const CalibrationAnchors& a) {
    geometry.validate();
    // base(n) = alpha + beta/n, solved from the two single-tier anchors
    double beta = (a.die_short - a.die_long) / (1.0 / a.short_cells - 1.0 / a.long_cells);
    double alpha = a.die_long - beta / a.long_cells;
    double n = geometry.total_cells_per_bitline();
    return alpha + beta / n + a.die_per_extra_tier * (geometry.tier_count() - 1);
}

std::vector<TradeoffRow> tradeoff_table(const std::vector<uint32_t>& cell_counts,
                                        const CalibrationAnchors& anchors) {
    DecompositionRatios decomposition;
    std::vector<TradeoffRow> rows;
    rows.reserve(cell_counts.size());
    for (uint32_t cells : cell_counts) {
        if (cells < 1) throw ConfigError("cell counts must be >= 1");
        DeviceGeometry g = DeviceGeometry::make({cells}, 1, 1, 64, 8);
        TradeoffRow r;
        r.cells = cells;
        r.trc_ns = trc_of_tier(g, 0, anchors);
        r.trcd_ns = decomposition.trcd_frac * r.trc_ns;
        r.die_norm = die_size(g, anchors);
        r.power_norm = power_of_tier(g, 0, anchors);
        rows.push_back(r);
    }
    return rows;
}

TimingParams timing_params_for(const DeviceGeometry& geometry, uint32_t tier_index,
                               const CalibrationAnchors& anchors,
                               const DecompositionRatios& d) {
    d.validate();
    TimingParams p;
    p.trc_ns = trc_of_tier(geometry, tier_index, anchors);
    p.tras_ns = d.tras_frac * p.trc_ns;
    p.trp_ns = d.trp_frac * p.trc_ns;
    p.trcd_ns = d.trcd_frac * p.trc_ns;
    p.tcl_ns = d.tcl_ns;
    p.twr_ns = d.twr_ns;
    p.tccd_ns = d.tccd_ns;
    p.tmig_ns = p.trc_ns + anchors.migration_extra_ns;
    return p;
}

uint64_t ns_to_cycles(double ns, double cycle_ns) {
    if (cycle_ns <= 0) throw ConfigError("cycle time must be positive");
    // small epsilon so exact multiples do not round up from FP noise
    double cycles = std::ceil(ns / cycle_ns - 1e-9);
    if (cycles < 0) cycles = 0;
    return static_cast<uint64_t>(cycles);
}

TimingCycles to_cycles(const TimingParams& p, double cycle_ns) {
    TimingCycles c;
    c.trc = ns_to_cycles(p.trc_ns, cycle_ns);
    c.tras = ns_to_cycles(p.tras_ns, cycle_ns);
    c.trp = ns_to_cycles(p.trp_ns, cycle_ns);
    c.trcd = ns_to_cycles(p.trcd_ns, cycle_ns);
    c.tcl = ns_to_cycles(p.tcl_ns, cycle_ns);
    c.twr = ns_to_cycles(p.twr_ns, cycle_ns);
    c.tccd = ns_to_cycles(p.tccd_ns, cycle_ns);
    c.tmig = ns_to_cycles(p.tmig_ns, cycle_ns);
    return c;
}

}  // namespace tldram
