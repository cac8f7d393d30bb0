#include "tldram/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tldram/errors.hpp"
#include "tldram/rng.hpp"
#include "tldram/workload.hpp"

namespace tldram {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<TimingCycles> per_tier_timings(const DeviceGeometry& g, const RunConfig& cfg,
                                           const CalibrationAnchors& anchors) {
    std::vector<TimingCycles> out;
    for (uint32_t t = 0; t < g.tier_count(); ++t)
        out.push_back(to_cycles(timing_params_for(g, t, anchors, cfg.decomposition), cfg.cycle_ns));
    return out;
}

}  // namespace

double StatsReport::total_ipc() const {
    double s = 0;
    for (double v : core_ipc) s += v;
    return s;
}

std::string StatsReport::body() const {
    std::ostringstream out;
    out << "# tldram-sim report v1\n";
    out << "version = " << version << '\n';
    out << "seed = " << seed << '\n';
    out << "requests = " << requests << '\n';
    out << "elapsed_cycles = " << elapsed_cycles << '\n';
    for (size_t i = 0; i < core_ipc.size(); ++i)
        out << "core." << i << ".ipc = " << fmt(core_ipc[i]) << '\n';
    out << "mean_latency_cycles = " << fmt(mean_latency) << '\n';
    out << "p95_latency_cycles = " << fmt(p95_latency) << '\n';
    out << "max_latency_cycles = " << max_latency << '\n';
    out << "near_fraction = " << fmt(near_fraction) << '\n';
    out << "row_hit_rate = " << fmt(row_hit_rate) << '\n';
    out << "migrations = " << migrations << '\n';
    out << "dirty_writebacks = " << dirty_writebacks << '\n';
    out << "energy.activation = " << fmt(energy.activation_energy) << '\n';
    out << "energy.migration = " << fmt(energy.migration_energy) << '\n';
    out << "energy.rdwr = " << fmt(energy.rdwr_energy) << '\n';
    out << "energy.total = " << fmt(energy.total()) << '\n';
    for (size_t t = 0; t < energy.activations_per_tier.size(); ++t)
        out << "energy.activations.tier" << t << " = " << energy.activations_per_tier[t] << '\n';
    std::istringstream cfg(config_echo);
    std::string line;
    while (std::getline(cfg, line)) out << "config." << line << '\n';
    return out.str();
}

std::vector<std::vector<TraceRecord>> build_traces(const RunConfig& cfg) {
    DeviceGeometry g = cfg.geometry();
    AddressMap map = AddressMap::for_geometry(g);
    std::vector<std::vector<TraceRecord>> traces;
    if (cfg.trace_kind == TraceKind::FILE) {
        std::ifstream in(cfg.trace_file);
        if (!in) throw WorkloadError("cannot open trace file: " + cfg.trace_file);
        std::vector<TraceRecord> t = parse_trace(in);
        for (uint32_t c = 0; c < cfg.core_count; ++c) traces.push_back(t);
        return traces;
    }
    for (uint32_t c = 0; c < cfg.core_count; ++c) {
        uint64_t core_seed = derive_seed(cfg.seed, c);
        if (cfg.trace_kind == TraceKind::HOTCOLD) {
            HotColdParams p;
            p.seed = core_seed;
            p.n = cfg.trace_n;
            p.row_count = cfg.trace_row_count;
            p.row_offset = cfg.trace_row_offset;
            p.write_fraction = cfg.trace_write_fraction;
            p.bubble_mean = cfg.trace_bubble_mean;
            p.hot_row_count = cfg.trace_hot_rows;
            p.hot_access_fraction = cfg.trace_hot_fraction;
            traces.push_back(gen_hotcold(g, map, p));
        } else {
            ZipfParams p;
            p.seed = core_seed;
            p.n = cfg.trace_n;
            p.row_count = cfg.trace_row_count;
            p.row_offset = cfg.trace_row_offset;
            p.write_fraction = cfg.trace_write_fraction;
            p.bubble_mean = cfg.trace_bubble_mean;
            p.exponent = cfg.trace_zipf_exponent;
            traces.push_back(gen_zipf(g, map, p));
        }
    }
    return traces;
}

RunOutput run(const RunConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    DeviceGeometry g = cfg.geometry();
    AddressMap map = AddressMap::for_geometry(g);
    CalibrationAnchors anchors;
    std::vector<TimingCycles> timings = per_tier_timings(g, cfg, anchors);

    std::optional<PageMapTable> page_map;
    if (!cfg.profile_file.empty()) {
        std::ifstream in(cfg.profile_file);
        if (!in) throw ConfigError("cannot open profile file: " + cfg.profile_file);
        page_map = build_profile_map(read_profile(in), cfg.profile_map_size, g);
    }

    TimingEngine engine(g, timings, derive_seed(cfg.seed, kDataSeedStream));
    engine.set_trace_recording(hooks.record_trace);

    EnergyLedger ledger;
    ledger.rdwr_cost = cfg.rdwr_energy_cost;

    MemController controller(engine, map, cfg.controller, cfg.policy,
                             page_map ? &*page_map : nullptr, &ledger, anchors, cfg.core_count);

    std::vector<std::vector<TraceRecord>> traces = build_traces(cfg);
    std::vector<CoreModel> cores;
    for (uint32_t c = 0; c < cfg.core_count; ++c)
        cores.emplace_back(c, std::move(traces[c]), cfg.max_outstanding);

    controller.set_on_complete([&](const MemRequest& req, uint64_t cycle) {
        cores[req.core].complete(cycle);
        if (hooks.on_complete) hooks.on_complete(req, cycle);
    });
    if (hooks.on_column) controller.set_on_column(hooks.on_column);

    bool decay_active = cfg.policy.kind == PolicyKind::BENEFIT_BASED;
    uint64_t epoch = cfg.policy.decay_epoch;
    uint64_t next_decay = decay_active ? epoch : UINT64_MAX;

    uint64_t now = 0;
    while (true) {
        bool cores_done = true;
        for (const auto& c : cores) cores_done &= c.done();
        if (cores_done && controller.idle()) break;

        auto tick = controller.tick(now);
        bool core_active = false;
        for (auto& core : cores) {
            if (core.done()) continue;
            CoreModel::Step step = core.tick(now);
            if (step == CoreModel::Step::RETIRED_BUBBLE) {
                core_active = true;
            } else if (step == CoreModel::Step::WANT_ISSUE) {
                const TraceRecord& rec = core.current();
                if (controller.enqueue(rec.address, rec.is_write, core.id(), now)) {
                    core.issue_accepted();
                    core_active = true;
                }
            }
        }

        uint64_t next = now + 1;
        if (!tick.issued && !tick.completed_any && !core_active) {
            if (tick.next_ready == UINT64_MAX) {
                bool all_done = true;
                for (const auto& c : cores) all_done &= c.done();
                if (!all_done || !controller.idle())
                    throw InternalError("simulation livelock at cycle " + std::to_string(now));
                break;
            }
            next = std::max(next, tick.next_ready);
        }
        if (decay_active && next >= next_decay) {
            next = next_decay;  // never skip over an epoch boundary
            controller.decay_policies();
            next_decay += epoch;
        }
        now = next;
    }

    const ControllerStats& cs = controller.stats();
    RunOutput out;
    out.report.seed = cfg.seed;
    out.report.config_echo = cfg.serialize();
    out.report.requests = cs.completed;
    out.report.elapsed_cycles = now;
    for (const auto& c : cores) out.report.core_ipc.push_back(c.ipc());
    out.report.mean_latency = cs.mean_latency();
    out.report.p95_latency = cs.p95_latency();
    out.report.max_latency = cs.max_latency;
    out.report.near_fraction =
        cs.completed == 0 ? 0.0 : static_cast<double>(cs.near_served) / cs.completed;
    out.report.row_hit_rate =
        cs.completed == 0 ? 0.0 : static_cast<double>(cs.row_hits) / cs.completed;
    out.report.migrations = cs.mig_commands;
    out.report.dirty_writebacks = cs.dirty_writebacks;
    out.report.energy = ledger;
    out.controller_stats = cs;
    if (hooks.record_trace) out.trace = engine.trace();
    return out;
}

std::vector<SweepRow> sweep_near_size(const RunConfig& cfg, const std::vector<uint32_t>& sizes) {
    std::vector<SweepRow> rows;
    for (uint32_t size : sizes) {
        RunConfig c = cfg;
        uint32_t total = cfg.near_cells + cfg.far_cells;
        if (size == 0 || size >= total)
            throw ConfigError("sweep size " + std::to_string(size) +
                              " invalid for total bitline of " + std::to_string(total));
        c.near_cells = size;
        c.far_cells = total - size;
        if (c.policy.kind != PolicyKind::NONE) c.policy.slot_count = size;
        if (c.trace_row_offset < size)
            throw ConfigError("trace.row_offset must cover the largest swept near size");
        RunOutput out = run(c);
        SweepRow r;
        r.size = size;
        r.ipc = out.report.total_ipc();
        r.mean_latency = out.report.mean_latency;
        r.near_fraction = out.report.near_fraction;
        rows.push_back(r);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << kCsvSchemaHeader << '\n';
    out << "size,ipc,mean_latency_cycles,near_fraction\n";
    for (const auto& r : rows)
        out << r.size << ',' << fmt(r.ipc) << ',' << fmt(r.mean_latency) << ','
            << fmt(r.near_fraction) << '\n';
    return out.str();
}

CompareReport compare(const RunConfig& a, const RunConfig& b) {
    if (!a.same_trace_source(b))
        throw ConfigError("compare requires identical trace source and seed in both configs");
    CompareReport rep;
    rep.baseline = run(a).report;
    rep.candidate = run(b).report;
    double ipc_a = rep.baseline.total_ipc();
    double ipc_b = rep.candidate.total_ipc();
    rep.ipc_delta_pct = ipc_a == 0 ? 0 : (ipc_b - ipc_a) / ipc_a * 100.0;
    rep.latency_delta = rep.candidate.mean_latency - rep.baseline.mean_latency;
    rep.weighted_speedup = 0;
    for (size_t i = 0; i < rep.baseline.core_ipc.size(); ++i) {
        double d = rep.baseline.core_ipc[i];
        rep.weighted_speedup += d == 0 ? 0 : rep.candidate.core_ipc[i] / d;
    }
    rep.energy_savings = savings_vs(rep.candidate.energy, rep.baseline.energy);
    return rep;
}

std::string CompareReport::body() const {
    std::ostringstream out;
    out << "# tldram-sim compare v1\n";
    out << "baseline = config_a\n";
    out << "ipc_delta_pct = " << fmt(ipc_delta_pct) << '\n';
    out << "mean_latency_delta_cycles = " << fmt(latency_delta) << '\n';
    out << "weighted_speedup = " << fmt(weighted_speedup) << '\n';
    if (energy_savings)
        out << "energy_savings = " << fmt(*energy_savings) << '\n';
    else
        out << "energy_savings = n/a\n";
    std::istringstream ba(baseline.body()), cb(candidate.body());
    std::string line;
    while (std::getline(ba, line)) out << "a." << line << '\n';
    while (std::getline(cb, line)) out << "b." << line << '\n';
    return out.str();
}

std::map<uint64_t, uint64_t> profile_counts(const RunConfig& cfg) {
    cfg.validate();
    DeviceGeometry g = cfg.geometry();
    AddressMap map = AddressMap::for_geometry(g);
    std::map<uint64_t, uint64_t> counts;
    for (const auto& trace : build_traces(cfg)) {
        for (const auto& rec : trace) {
            if (!rec.has_access) continue;
            auto d = map.decode(rec.address);
            ++counts[global_row_id(g, d.bank, d.subarray, d.row)];
        }
    }
    return counts;
}

std::string tradeoff_csv(const std::vector<uint32_t>& cell_counts) {
    CalibrationAnchors anchors;
    std::ostringstream out;
    out << kCsvSchemaHeader << '\n';
    out << "cells,trc_ns,trcd_ns,die_norm,power_norm\n";
    for (const auto& r : tradeoff_table(cell_counts, anchors))
        out << r.cells << ',' << fmt(r.trc_ns) << ',' << fmt(r.trcd_ns) << ',' << fmt(r.die_norm)
            << ',' << fmt(r.power_norm) << '\n';
    return out.str();
}

}  // namespace tldram
