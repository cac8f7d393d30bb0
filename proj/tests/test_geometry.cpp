#include <cmath>

#include "doctest.h"
#include "tldram/errors.hpp"
#include "tldram/geometry.hpp"

using namespace tldram;

namespace {

DeviceGeometry segmented() { return DeviceGeometry::make({32, 480}, 4, 8, 64, 8); }

}  // namespace

TEST_CASE("geometry construction and row lookup") {
    DeviceGeometry g = segmented();
    CHECK(g.tier_count() == 2);
    CHECK(g.near_rows() == 32);
    CHECK(g.total_cells_per_bitline() == 512);
    CHECK(g.tiers[0].connected_cells_when_accessed == 32);
    CHECK(g.tiers[0].isolation_transistors_to_amp == 0);
    CHECK(g.tiers[1].connected_cells_when_accessed == 512);
    CHECK(g.tiers[1].isolation_transistors_to_amp == 1);
    CHECK(g.tier_of_row(0) == 0);
    CHECK(g.tier_of_row(31) == 0);
    CHECK(g.tier_of_row(32) == 1);
    CHECK(g.tier_of_row(511) == 1);
    CHECK(g.total_rows() == 512ULL * 4 * 8);
    CHECK(g.capacity_bytes() == 512ULL * 4 * 8 * 64 * 8);
    CHECK_THROWS_AS((void)g.tier_of_row(512), ConfigError);
}

TEST_CASE("three-tier connected-cell accumulation") {
    DeviceGeometry g = DeviceGeometry::make({32, 96, 384}, 1, 1, 64, 8);
    CHECK(g.tiers[1].connected_cells_when_accessed == 128);
    CHECK(g.tiers[2].connected_cells_when_accessed == 512);
    CHECK(g.tiers[2].isolation_transistors_to_amp == 2);
}

TEST_CASE("latency model reproduces the calibration anchors") {
    CalibrationAnchors a;
    DeviceGeometry g = segmented();
    CHECK(trc_of_tier(g, 0, a) == doctest::Approx(23.1).epsilon(1e-9));
    CHECK(trc_of_tier(g, 1, a) == doctest::Approx(65.8).epsilon(1e-9));

    DeviceGeometry flat512 = DeviceGeometry::make({512}, 1, 1, 64, 8);
    CHECK(trc_of_tier(flat512, 0, a) == doctest::Approx(52.5).epsilon(1e-9));
}

TEST_CASE("latency model is affine in connected cells") {
    // independent oracle: line through the two single-tier anchors
    CalibrationAnchors a;
    double slope = (a.trc_long_ns - a.trc_short_ns) / (a.long_cells - a.short_cells);
    double intercept = a.trc_short_ns - slope * a.short_cells;
    for (uint32_t n : {16u, 64u, 128u, 300u, 1024u}) {
        DeviceGeometry g = DeviceGeometry::make({n}, 1, 1, 64, 8);
        CHECK(trc_of_tier(g, 0, a) == doctest::Approx(intercept + slope * n).epsilon(1e-9));
    }
    // per-transistor penalty equals the far-anchor residual
    double penalty = a.trc_far_ns - a.trc_long_ns;
    DeviceGeometry three = DeviceGeometry::make({32, 96, 384}, 1, 1, 64, 8);
    CHECK(trc_of_tier(three, 2, a) ==
          doctest::Approx(intercept + slope * 512 + 2 * penalty).epsilon(1e-9));
}

TEST_CASE("power model reproduces the calibration anchors") {
    CalibrationAnchors a;
    DeviceGeometry g = segmented();
    CHECK(power_of_tier(g, 0, a) == doctest::Approx(0.51).epsilon(1e-9));
    CHECK(power_of_tier(g, 1, a) == doctest::Approx(1.49).epsilon(1e-9));
    DeviceGeometry flat512 = DeviceGeometry::make({512}, 1, 1, 64, 8);
    CHECK(power_of_tier(flat512, 0, a) == doctest::Approx(1.00).epsilon(1e-9));
}

TEST_CASE("die size model reproduces the calibration anchors") {
    CalibrationAnchors a;
    CHECK(die_size(DeviceGeometry::make({32}, 1, 1, 64, 8), a) ==
          doctest::Approx(3.76).epsilon(1e-9));
    CHECK(die_size(DeviceGeometry::make({512}, 1, 1, 64, 8), a) ==
          doctest::Approx(1.00).epsilon(1e-9));
    CHECK(die_size(segmented(), a) == doctest::Approx(1.03).epsilon(1e-9));
    // each extra tier costs one more isolation overhead
    CHECK(die_size(DeviceGeometry::make({32, 96, 384}, 1, 1, 64, 8), a) ==
          doctest::Approx(1.06).epsilon(1e-9));
}

TEST_CASE("latency and power fall monotonically with shorter bitlines") {
    CalibrationAnchors a;
    double prev_trc = 0, prev_pow = 0;
    double prev_die = 1e18;
    for (uint32_t n : {16u, 32u, 64u, 128u, 256u, 512u}) {
        DeviceGeometry g = DeviceGeometry::make({n}, 1, 1, 64, 8);
        double t = trc_of_tier(g, 0, a);
        double p = power_of_tier(g, 0, a);
        double d = die_size(g, a);
        CHECK(t > prev_trc);
        CHECK(p > prev_pow);
        CHECK(d < prev_die);
        prev_trc = t;
        prev_pow = p;
        prev_die = d;
    }
}

TEST_CASE("degenerate segmentation matches the unsegmented device") {
    // a far segment of zero cells must not change tier-0 behavior
    CalibrationAnchors a;
    DeviceGeometry flat = DeviceGeometry::make({512}, 1, 1, 64, 8);
    DeviceGeometry g = segmented();
    // the near segment of the 512-cell device sees all 512 cells
    CHECK(trc_of_tier(flat, 0, a) == doctest::Approx(a.trc_long_ns));
    CHECK(g.tier_of_row(0) == 0);
}

TEST_CASE("timing decomposition and migration latency") {
    CalibrationAnchors a;
    DecompositionRatios d;
    DeviceGeometry g = segmented();

    TimingParams near = timing_params_for(g, 0, a, d);
    CHECK(near.trc_ns == doctest::Approx(23.1));
    CHECK(near.tras_ns == doctest::Approx(0.7 * 23.1));
    CHECK(near.trp_ns == doctest::Approx(0.3 * 23.1));
    CHECK(near.trcd_ns == doctest::Approx(0.3 * 23.1));
    CHECK(near.tras_ns + near.trp_ns == doctest::Approx(near.trc_ns));
    CHECK(near.tcl_ns == doctest::Approx(13.1));
    CHECK(near.twr_ns == doctest::Approx(15.0));

    TimingParams far = timing_params_for(g, 1, a, d);
    CHECK(far.trc_ns == doctest::Approx(65.8));
    CHECK(far.tmig_ns == doctest::Approx(69.8));
}

TEST_CASE("cycle conversion rounds up without double-rounding artifacts") {
    CHECK(ns_to_cycles(23.1, 1.25) == 19);
    CHECK(ns_to_cycles(65.8, 1.25) == 53);
    CHECK(ns_to_cycles(69.8, 1.25) == 56);
    CHECK(ns_to_cycles(15.0, 1.25) == 12);  // exact multiple stays exact
    CHECK(ns_to_cycles(5.0, 1.25) == 4);
    CHECK(ns_to_cycles(0.0, 1.25) == 0);

    CalibrationAnchors a;
    DecompositionRatios d;
    DeviceGeometry g = segmented();
    TimingCycles near = to_cycles(timing_params_for(g, 0, a, d), 1.25);
    CHECK(near.trc == 19);
    CHECK(near.tras == 13);
    CHECK(near.trp == 6);
    CHECK(near.trcd == 6);
    CHECK(near.tcl == 11);
    CHECK(near.twr == 12);
    CHECK(near.tccd == 4);
    TimingCycles far = to_cycles(timing_params_for(g, 1, a, d), 1.25);
    CHECK(far.trc == 53);
    CHECK(far.trcd == 16);
    CHECK(far.tras == 37);
    CHECK(far.trp == 16);
    CHECK(far.tmig == 56);
}

TEST_CASE("tradeoff table shape") {
    CalibrationAnchors a;
    auto rows = tradeoff_table({32, 64, 128, 256, 512}, a);
    REQUIRE(rows.size() == 5);
    CHECK(rows.front().trc_ns == doctest::Approx(23.1));
    CHECK(rows.back().trc_ns == doctest::Approx(52.5));
    CHECK(rows.front().die_norm == doctest::Approx(3.76));
    CHECK(rows.back().die_norm == doctest::Approx(1.00));
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].trc_ns > rows[i - 1].trc_ns);
        CHECK(rows[i].die_norm < rows[i - 1].die_norm);
        CHECK(rows[i].power_norm > rows[i - 1].power_norm);
    }
}

TEST_CASE("invalid geometry and ratios are rejected") {
    CHECK_THROWS_AS(DeviceGeometry::make({}, 1, 1, 64, 8).validate(), ConfigError);
    CHECK_THROWS_AS(DeviceGeometry::make({0, 480}, 1, 1, 64, 8).validate(), ConfigError);
    DecompositionRatios bad;
    bad.tras_frac = 0.6;  // no longer sums to 1 with trp_frac
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
