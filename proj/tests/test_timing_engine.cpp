#include <random>
#include <sstream>

#include "doctest.h"
#include "tldram/errors.hpp"
#include "tldram/timing_engine.hpp"

using namespace tldram;

namespace {

DeviceGeometry geom() { return DeviceGeometry::make({32, 480}, 4, 8, 64, 8); }

std::vector<TimingCycles> cycles_for(const DeviceGeometry& g) {
    CalibrationAnchors a;
    DecompositionRatios d;
    std::vector<TimingCycles> out;
    for (uint32_t t = 0; t < g.tier_count(); ++t)
        out.push_back(to_cycles(timing_params_for(g, t, a, d), 1.25));
    return out;
}

TimingEngine make_engine() { return TimingEngine(geom(), cycles_for(geom()), 42); }

}  // namespace

TEST_CASE("activate to activate on one bank is separated by tRC") {
    TimingEngine e = make_engine();
    e.apply(Command::act(0, 0, 100), 0);  // far row
    uint64_t pre_at = e.earliest_issue(Command::pre(0), 1);
    CHECK(pre_at == 37);  // tRAS
    e.apply(Command::pre(0), pre_at);
    uint64_t act_at = e.earliest_issue(Command::act(0, 0, 200), pre_at + 1);
    CHECK(act_at == 53);  // max(tRAS + tRP, tRC) = tRC for the far tier
    e.apply(Command::act(0, 0, 200), act_at);

    SUBCASE("near tier turns around faster") {
        TimingEngine n = make_engine();
        n.apply(Command::act(0, 0, 3), 0);  // near row
        uint64_t p = n.earliest_issue(Command::pre(0), 1);
        CHECK(p == 13);
        n.apply(Command::pre(0), p);
        CHECK(n.earliest_issue(Command::act(0, 0, 4), p + 1) == 19);
    }
}

TEST_CASE("banks share only the command channel") {
    TimingEngine e = make_engine();
    e.apply(Command::act(0, 0, 100), 5);
    // another bank can go the very next cycle
    CHECK(e.earliest_issue(Command::act(1, 0, 100), 5) == 6);
    e.apply(Command::act(1, 0, 100), 6);
    // and its column timing is independent of bank 0
    CHECK(e.earliest_issue(Command::rd(1, 0, 100, 0), 7) == 6 + 16);
}

TEST_CASE("phase violations are outright errors") {
    TimingEngine e = make_engine();
    CHECK_THROWS_AS((void)e.earliest_issue(Command::pre(0), 0), ProtocolError);
    CHECK_THROWS_AS((void)e.earliest_issue(Command::rd(0, 0, 5, 0), 0), ProtocolError);
    e.apply(Command::act(0, 0, 100), 0);
    // second ACT while a row is open
    CHECK_THROWS_AS((void)e.earliest_issue(Command::act(0, 0, 101), 20), ProtocolError);
    // column command to a row other than the open one
    CHECK_THROWS_AS((void)e.earliest_issue(Command::rd(0, 0, 101, 0), 20), ProtocolError);
    // MIG needs a precharged bank
    CHECK_THROWS_AS((void)e.earliest_issue(Command::mig(0, 0, 100, 3), 20), ProtocolError);
}

TEST_CASE("column timing: tRCD, tCL, tWR, tCCD") {
    TimingEngine e = make_engine();
    e.apply(Command::act(0, 0, 3), 0);  // near row, tRCD = 6
    CHECK(e.earliest_issue(Command::rd(0, 0, 3, 0), 0) == 6);
    ApplyResult rd = e.apply(Command::rd(0, 0, 3, 0), 6);
    CHECK(rd.completion == 6 + 11);  // tCL
    CHECK(e.earliest_issue(Command::rd(0, 0, 3, 1), 7) == 10);  // tCCD = 4
    ApplyResult wr = e.apply(Command::wr(0, 0, 3, 1, 0xabc), 10);
    CHECK(wr.completion == 10 + 11 + 12);  // tCL + tWR
    // the write must restore before the row can close
    CHECK(e.earliest_issue(Command::pre(0), 11) == 10 + 11 + 12);
}

TEST_CASE("reads observe prior writes, pristine data is deterministic") {
    TimingEngine e = make_engine();
    TimingEngine e2 = make_engine();
    e.apply(Command::act(0, 1, 40), 0);
    uint64_t pristine = e.apply(Command::rd(0, 1, 40, 7), 16).read_token;
    CHECK(pristine == e2.store().read(0, 1, 40, 7));  // same data seed, same pattern

    e.apply(Command::wr(0, 1, 40, 7, 0xdeadbeef), 20);
    CHECK(e.apply(Command::rd(0, 1, 40, 7), 43).read_token == 0xdeadbeef);
    // other columns untouched
    CHECK(e.apply(Command::rd(0, 1, 40, 8), 47).read_token == e2.store().read(0, 1, 40, 8));
}

TEST_CASE("MIG occupies the bank and copies the source row") {
    TimingEngine e = make_engine();
    auto before = e.store().row_image(2, 1, 200);
    ApplyResult r = e.apply(Command::mig(2, 1, 200, 5), 10);
    CHECK(r.completion == 10 + 56);  // far participant tMIG

    // dest row now holds the source image
    CHECK(e.store().row_image(2, 1, 5) == before);
    // the bank is busy for the whole transfer, other banks are not
    CHECK(e.earliest_issue(Command::act(2, 0, 7), 11) == 66);
    CHECK(e.earliest_issue(Command::act(3, 0, 7), 11) == 11);
    // and the bank ends precharged
    e.apply(Command::act(2, 1, 5), 66);
}

TEST_CASE("MIG duration follows the slower participant") {
    TimingEngine e = make_engine();
    CHECK(e.mig_cycles(0, 1) == 56);
    CHECK(e.mig_cycles(1, 0) == 56);
    CHECK(e.mig_cycles(0, 0) == e.timings(0).tmig);
    CHECK(e.timings(0).tmig == 22);  // ceil((23.1 + 4) / 1.25)
}

TEST_CASE("trace validation accepts engine-generated traces") {
    TimingEngine e = make_engine();
    uint64_t now = 0;
    auto step = [&](const Command& c) {
        now = e.earliest_issue(c, now);
        e.apply(c, now);
    };
    step(Command::act(0, 0, 100));
    step(Command::rd(0, 0, 100, 3));
    step(Command::wr(0, 0, 100, 4, 1));
    step(Command::pre(0));
    step(Command::mig(0, 0, 100, 2));
    step(Command::act(0, 0, 2));
    step(Command::rd(0, 0, 2, 3));
    CHECK(validate_command_trace(e.trace(), e.geometry(), cycles_for(geom())).empty());
}

TEST_CASE("trace validation flags violations") {
    DeviceGeometry g = geom();
    auto tc = cycles_for(g);

    SUBCASE("tRC too tight") {
        std::vector<TimedCommand> t{
            {0, Command::act(0, 0, 100)},
            {37, Command::pre(0)},
            {53, Command::act(0, 0, 100)},
        };
        CHECK(validate_command_trace(t, g, tc).empty());
        t[2].cycle = 52;
        // moving the PRE as well keeps tRP satisfied, isolating tRC
        t[1].cycle = 36;
        auto v = validate_command_trace(t, g, tc);
        bool saw_trc = false, saw_tras = false;
        for (const auto& x : v) {
            if (x.constraint.find("tRC") != std::string::npos) saw_trc = true;
            if (x.constraint.find("tRAS") != std::string::npos) saw_tras = true;
        }
        CHECK(saw_trc);
        CHECK(saw_tras);
    }

    SUBCASE("channel admits one command per cycle") {
        std::vector<TimedCommand> t{
            {0, Command::act(0, 0, 100)},
            {0, Command::act(1, 0, 100)},
        };
        auto v = validate_command_trace(t, g, tc);
        REQUIRE(!v.empty());
        CHECK(v[0].constraint.find("channel") != std::string::npos);
    }

    SUBCASE("command into a migrating bank") {
        std::vector<TimedCommand> t{
            {0, Command::mig(0, 0, 100, 2)},
            {30, Command::act(0, 0, 2)},
        };
        CHECK(!validate_command_trace(t, g, tc).empty());
        t[1].cycle = 56;
        CHECK(validate_command_trace(t, g, tc).empty());
    }

    SUBCASE("empty trace is clean") {
        CHECK(validate_command_trace({}, g, tc).empty());
    }
}

TEST_CASE("randomized legal traffic validates clean, mutations do not") {
    DeviceGeometry g = geom();
    auto tc = cycles_for(g);
    std::mt19937_64 rng(7);
    TimingEngine e(g, tc, 7);
    uint64_t now = 0;
    for (int i = 0; i < 4000; ++i) {
        uint32_t bank = static_cast<uint32_t>(rng() % g.banks);
        const BankState& b = e.bank(bank);
        Command c;
        bool open = b.has_open_row;
        uint32_t pick = static_cast<uint32_t>(rng() % 4);
        if (!open) {
            uint32_t sub = static_cast<uint32_t>(rng() % 4);
            if (pick == 0)
                c = Command::mig(bank, sub, 32 + rng() % 480, rng() % 32);
            else
                c = Command::act(bank, sub, rng() % 512);
        } else {
            if (pick == 0)
                c = Command::pre(bank);
            else if (pick == 1)
                c = Command::wr(bank, b.open_subarray, b.open_row, rng() % 64, rng());
            else
                c = Command::rd(bank, b.open_subarray, b.open_row, rng() % 64);
        }
        uint64_t at = e.earliest_issue(c, now);
        e.apply(c, at);
        now = at;
    }
    auto trace = e.trace();
    CHECK(validate_command_trace(trace, g, tc).empty());

    // a trace generated against a 1-cycle-faster far tRCD must fail the
    // validator running with the true timings
    auto loose = tc;
    loose[1].trcd -= 1;
    TimingEngine e2(g, loose, 7);
    std::mt19937_64 rng2(7);
    uint64_t now2 = 0;
    for (int i = 0; i < 4000; ++i) {
        uint32_t bank = static_cast<uint32_t>(rng2() % g.banks);
        const BankState& b = e2.bank(bank);
        Command c;
        uint32_t pick = static_cast<uint32_t>(rng2() % 4);
        if (!b.has_open_row) {
            uint32_t sub = static_cast<uint32_t>(rng2() % 4);
            c = pick == 0 ? Command::mig(bank, sub, 32 + rng2() % 480, rng2() % 32)
                          : Command::act(bank, sub, rng2() % 512);
        } else if (pick == 0) {
            c = Command::pre(bank);
        } else if (pick == 1) {
            c = Command::wr(bank, b.open_subarray, b.open_row, rng2() % 64, rng2());
        } else {
            c = Command::rd(bank, b.open_subarray, b.open_row, rng2() % 64);
        }
        uint64_t at = e2.earliest_issue(c, now2);
        e2.apply(c, at);
        now2 = at;
    }
    auto violations = validate_command_trace(e2.trace(), g, tc);
    CHECK(!violations.empty());
    bool all_trcd = true;
    for (const auto& v : violations)
        if (v.constraint.find("tRCD") == std::string::npos) all_trcd = false;
    CHECK(all_trcd);
}

TEST_CASE("command trace round-trips through text") {
    TimingEngine e = make_engine();
    e.apply(Command::act(0, 2, 100), 0);
    e.apply(Command::rd(0, 2, 100, 9), 16);
    e.apply(Command::pre(0), 37);
    e.apply(Command::mig(0, 2, 100, 1), 53);
    std::stringstream ss;
    dump_command_trace(ss, e.trace());
    auto back = parse_command_trace(ss);
    REQUIRE(back.size() == e.trace().size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].cycle == e.trace()[i].cycle);
        CHECK(back[i].cmd.kind == e.trace()[i].cmd.kind);
        CHECK(back[i].cmd.bank == e.trace()[i].cmd.bank);
        CHECK(back[i].cmd.row == e.trace()[i].cmd.row);
    }
}
