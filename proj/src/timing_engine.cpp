#include "tldram/timing_engine.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "tldram/errors.hpp"
#include "tldram/rng.hpp"

namespace tldram {

const char* to_string(CommandKind kind) {
    switch (kind) {
        case CommandKind::ACT: return "ACT";
        case CommandKind::RD: return "RD";
        case CommandKind::WR: return "WR";
        case CommandKind::PRE: return "PRE";
        case CommandKind::MIG: return "MIG";
    }
    return "?";
}

std::optional<CommandKind> command_kind_from_string(const std::string& s) {
    if (s == "ACT") return CommandKind::ACT;
    if (s == "RD") return CommandKind::RD;
    if (s == "WR") return CommandKind::WR;
    if (s == "PRE") return CommandKind::PRE;
    if (s == "MIG") return CommandKind::MIG;
    return std::nullopt;
}

Command Command::act(uint32_t bank, uint32_t subarray, uint32_t row) {
    Command c;
    c.kind = CommandKind::ACT;
    c.bank = bank;
    c.subarray = subarray;
    c.row = row;
    return c;
}

Command Command::rd(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column) {
    Command c;
    c.kind = CommandKind::RD;
    c.bank = bank;
    c.subarray = subarray;
    c.row = row;
    c.column = column;
    return c;
}

Command Command::wr(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column,
                    uint64_t token) {
    Command c = rd(bank, subarray, row, column);
    c.kind = CommandKind::WR;
    c.write_token = token;
    return c;
}

Command Command::pre(uint32_t bank) {
    Command c;
    c.kind = CommandKind::PRE;
    c.bank = bank;
    return c;
}

Command Command::mig(uint32_t bank, uint32_t subarray, uint32_t src_row, uint32_t dst_row) {
    Command c;
    c.kind = CommandKind::MIG;
    c.bank = bank;
    c.subarray = subarray;
    c.row = src_row;
    c.row2 = dst_row;
    return c;
}

void BankState::settle(uint64_t now) {
    if (phase == BankPhase::ACTIVATING && now >= active_at) phase = BankPhase::ACTIVE;
    if (phase == BankPhase::PRECHARGING && now >= precharged_at) phase = BankPhase::PRECHARGED;
    if (phase == BankPhase::MIGRATING && now >= busy_until) phase = BankPhase::PRECHARGED;
}

// ---------------------------------------------------------------------------
// DataStore

DataStore::DataStore(const DeviceGeometry& geometry, uint64_t seed)
    : subarrays_(geometry.subarrays_per_bank),
      rows_(geometry.rows_per_subarray),
      columns_(geometry.columns_per_row),
      seed_(seed) {}

uint64_t DataStore::key(uint32_t bank, uint32_t subarray, uint32_t row) const {
    return (static_cast<uint64_t>(bank) * subarrays_ + subarray) * rows_ + row;
}

uint64_t DataStore::pristine(uint64_t row_key, uint32_t column) const {
    uint64_t s = seed_ ^ (row_key * 0x9e3779b97f4a7c15ULL) ^ (static_cast<uint64_t>(column) << 32);
    return splitmix64(s);
}

std::vector<uint64_t>& DataStore::materialize(uint64_t row_key) {
    auto it = rows_map_.find(row_key);
    if (it != rows_map_.end()) return it->second;
    std::vector<uint64_t> image(columns_);
    for (uint32_t c = 0; c < columns_; ++c) image[c] = pristine(row_key, c);
    return rows_map_.emplace(row_key, std::move(image)).first->second;
}

uint64_t DataStore::read(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column) const {
    uint64_t k = key(bank, subarray, row);
    auto it = rows_map_.find(k);
    if (it != rows_map_.end()) return it->second[column];
    return pristine(k, column);
}

void DataStore::write(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column,
                      uint64_t token) {
    materialize(key(bank, subarray, row))[column] = token;
}

void DataStore::copy_row(uint32_t bank, uint32_t subarray, uint32_t src_row, uint32_t dst_row) {
    std::vector<uint64_t> src = row_image(bank, subarray, src_row);
    materialize(key(bank, subarray, dst_row)) = std::move(src);
}

std::vector<uint64_t> DataStore::row_image(uint32_t bank, uint32_t subarray, uint32_t row) const {
    uint64_t k = key(bank, subarray, row);
    auto it = rows_map_.find(k);
    if (it != rows_map_.end()) return it->second;
    std::vector<uint64_t> image(columns_);
    for (uint32_t c = 0; c < columns_; ++c) image[c] = pristine(k, c);
    return image;
}

// ---------------------------------------------------------------------------
// TimingEngine

TimingEngine::TimingEngine(DeviceGeometry geometry, std::vector<TimingCycles> per_tier,
                           uint64_t data_seed)
    : geometry_(std::move(geometry)),
      per_tier_(std::move(per_tier)),
      banks_(geometry_.banks),
      store_(geometry_, data_seed) {
    geometry_.validate();
    if (per_tier_.size() != geometry_.tier_count())
        throw ConfigError("need one TimingCycles entry per tier");
}

uint64_t TimingEngine::mig_cycles(uint32_t tier_a, uint32_t tier_b) const {
    return std::max(per_tier_[tier_a].tmig, per_tier_[tier_b].tmig);
}

void TimingEngine::check_structure(const Command& cmd) const {
    if (cmd.bank >= geometry_.banks)
        throw ProtocolError("bank index " + std::to_string(cmd.bank) + " out of range");
    if (cmd.kind == CommandKind::PRE) return;
    if (cmd.subarray >= geometry_.subarrays_per_bank)
        throw ProtocolError("subarray index " + std::to_string(cmd.subarray) + " out of range");
    if (cmd.row >= geometry_.rows_per_subarray)
        throw ProtocolError("row index " + std::to_string(cmd.row) + " out of range");
    if (cmd.kind == CommandKind::RD || cmd.kind == CommandKind::WR) {
        if (cmd.column >= geometry_.columns_per_row)
            throw ProtocolError("column index " + std::to_string(cmd.column) + " out of range");
    }
    if (cmd.kind == CommandKind::MIG) {
        if (cmd.row2 >= geometry_.rows_per_subarray)
            throw ProtocolError("MIG destination row out of range");
        if (geometry_.tier_of_row(cmd.row) == geometry_.tier_of_row(cmd.row2))
            throw ProtocolError("MIG source and destination must lie in different tiers");
    }
}

void TimingEngine::check_phase(const BankState& bank, const Command& cmd) const {
    auto phase_name = [](BankPhase p) {
        switch (p) {
            case BankPhase::PRECHARGED: return "PRECHARGED";
            case BankPhase::ACTIVATING: return "ACTIVATING";
            case BankPhase::ACTIVE: return "ACTIVE";
            case BankPhase::PRECHARGING: return "PRECHARGING";
            case BankPhase::MIGRATING: return "MIGRATING";
        }
        return "?";
    };
    auto illegal = [&](const char* why) {
        throw ProtocolError(std::string(to_string(cmd.kind)) + " illegal in phase " +
                            phase_name(bank.phase) + " on bank " + std::to_string(cmd.bank) +
                            ": " + why);
    };
    switch (cmd.kind) {
        case CommandKind::ACT:
            if (bank.has_open_row) illegal("row already open");
            break;
        case CommandKind::RD:
        case CommandKind::WR:
            if (!bank.has_open_row) illegal("no open row");
            if (bank.open_subarray != cmd.subarray || bank.open_row != cmd.row)
                illegal("column command targets a row that is not open");
            break;
        case CommandKind::PRE:
            if (!bank.has_open_row) illegal("nothing to precharge");
            break;
        case CommandKind::MIG:
            if (bank.has_open_row) illegal("migration needs a precharged bank");
            break;
    }
}

uint64_t TimingEngine::earliest_issue(const Command& cmd, uint64_t now) const {
    check_structure(cmd);
    BankState bank = banks_[cmd.bank];
    bank.settle(now);
    check_phase(bank, cmd);
    uint64_t t = std::max(now, bank.earliest[static_cast<size_t>(cmd.kind)]);
    t = std::max(t, bank.busy_until);
    if (channel_used_) t = std::max(t, last_issue_ + 1);  // one command per cycle
    return t;
}

ApplyResult TimingEngine::apply(const Command& cmd, uint64_t now) {
    uint64_t earliest = earliest_issue(cmd, now);
    if (now < earliest)
        throw ProtocolError(std::string(to_string(cmd.kind)) + " issued at cycle " +
                            std::to_string(now) + " before earliest legal cycle " +
                            std::to_string(earliest));
    BankState& bank = banks_[cmd.bank];
    bank.settle(now);

    auto raise = [&](CommandKind k, uint64_t cycle) {
        uint64_t& e = bank.earliest[static_cast<size_t>(k)];
        e = std::max(e, cycle);
    };

    ApplyResult result;
    Command recorded = cmd;
    switch (cmd.kind) {
        case CommandKind::ACT: {
            uint32_t tier = geometry_.tier_of_row(cmd.row);
            const TimingCycles& tc = per_tier_[tier];
            bank.phase = BankPhase::ACTIVATING;
            bank.has_open_row = true;
            bank.open_subarray = cmd.subarray;
            bank.open_row = cmd.row;
            bank.open_tier = tier;
            bank.active_at = now + tc.trcd;
            raise(CommandKind::ACT, now + tc.trc);
            raise(CommandKind::MIG, now + tc.trc);
            raise(CommandKind::RD, now + tc.trcd);
            raise(CommandKind::WR, now + tc.trcd);
            raise(CommandKind::PRE, now + tc.tras);
            result.completion = now + tc.trcd;
            break;
        }
        case CommandKind::RD: {
            const TimingCycles& tc = per_tier_[bank.open_tier];
            raise(CommandKind::RD, now + tc.tccd);
            raise(CommandKind::WR, now + tc.tccd);
            result.completion = now + tc.tcl;
            result.read_token = store_.read(cmd.bank, cmd.subarray, cmd.row, cmd.column);
            break;
        }
        case CommandKind::WR: {
            const TimingCycles& tc = per_tier_[bank.open_tier];
            raise(CommandKind::RD, now + tc.tccd);
            raise(CommandKind::WR, now + tc.tccd);
            raise(CommandKind::PRE, now + tc.tcl + tc.twr);
            store_.write(cmd.bank, cmd.subarray, cmd.row, cmd.column, cmd.write_token);
            result.completion = now + tc.tcl + tc.twr;
            break;
        }
        case CommandKind::PRE: {
            const TimingCycles& tc = per_tier_[bank.open_tier];
            recorded.subarray = bank.open_subarray;
            recorded.row = bank.open_row;
            bank.phase = BankPhase::PRECHARGING;
            bank.has_open_row = false;
            bank.precharged_at = now + tc.trp;
            raise(CommandKind::ACT, now + tc.trp);
            raise(CommandKind::MIG, now + tc.trp);
            result.completion = now + tc.trp;
            break;
        }
        case CommandKind::MIG: {
            uint32_t src_tier = geometry_.tier_of_row(cmd.row);
            uint32_t dst_tier = geometry_.tier_of_row(cmd.row2);
            uint64_t duration = mig_cycles(src_tier, dst_tier);
            bank.phase = BankPhase::MIGRATING;
            bank.busy_until = now + duration;
            for (size_t k = 0; k < bank.earliest.size(); ++k)
                bank.earliest[k] = std::max(bank.earliest[k], now + duration);
            // full row image moves over the bitline bus; the copy is visible
            // once the bank leaves MIGRATING
            store_.copy_row(cmd.bank, cmd.subarray, cmd.row, cmd.row2);
            result.completion = now + duration;
            break;
        }
    }
    channel_used_ = true;
    last_issue_ = now;
    if (record_trace_) trace_.push_back({now, recorded});
    return result;
}

// ---------------------------------------------------------------------------
// Trace validation (independent brute-force oracle)

namespace {

bool is_column(CommandKind k) { return k == CommandKind::RD || k == CommandKind::WR; }

struct Checker {
    const std::vector<TimedCommand>& trace;
    const DeviceGeometry& geometry;
    const std::vector<TimingCycles>& tc;
    std::vector<Violation>& out;
    uint64_t max_gap;

    uint64_t trc(uint32_t row) const { return tc[geometry.tier_of_row(row)].trc; }
    uint64_t trcd(uint32_t row) const { return tc[geometry.tier_of_row(row)].trcd; }
    uint64_t tras(uint32_t row) const { return tc[geometry.tier_of_row(row)].tras; }
    uint64_t trp(uint32_t row) const { return tc[geometry.tier_of_row(row)].trp; }
    uint64_t tmig(const Command& m) const {
        return std::max(tc[geometry.tier_of_row(m.row)].tmig,
                        tc[geometry.tier_of_row(m.row2)].tmig);
    }

    void flag(size_t i, size_t j, std::string name) { out.push_back({i, j, std::move(name)}); }

    // check command at position q of the per-bank index list
    void check(const std::vector<size_t>& bank_cmds, size_t q) {
        size_t bi = bank_cmds[q];
        const Command& b = trace[bi].cmd;
        uint64_t tb = trace[bi].cycle;

        bool found_opener = false;  // nearest preceding ACT/PRE/MIG seen
        bool opener_is_act = false;
        bool found_pre = false;
        bool found_mig = false;
        bool act_before_pre_or_mig = false;  // for column/PRE legality
        size_t nearest_act = 0;
        uint32_t nearest_act_row = 0;

        for (size_t p = q; p-- > 0;) {
            size_t ai = bank_cmds[p];
            const Command& a = trace[ai].cmd;
            uint64_t ta = trace[ai].cycle;
            uint64_t gap = tb - ta;
            bool in_window = gap <= max_gap;

            if (a.kind == CommandKind::MIG && !found_mig) {
                found_mig = true;
                if (gap < tmig(a)) flag(ai, bi, "tMIG busy window");
            }

            bool is_opener = a.kind == CommandKind::ACT || a.kind == CommandKind::PRE ||
                             a.kind == CommandKind::MIG;

            if (in_window) {
                switch (b.kind) {
                    case CommandKind::ACT:
                        if (a.kind == CommandKind::ACT && gap < trc(a.row))
                            flag(ai, bi, "tRC ACT->ACT");
                        if (a.kind == CommandKind::PRE && !found_pre && gap < trp(a.row))
                            flag(ai, bi, "tRP PRE->ACT");
                        break;
                    case CommandKind::RD:
                    case CommandKind::WR:
                        if (is_column(a.kind) && gap < tc[0].tccd) flag(ai, bi, "tCCD");
                        if (a.kind == CommandKind::ACT && !found_opener && gap < trcd(a.row))
                            flag(ai, bi, "tRCD ACT->column");
                        break;
                    case CommandKind::PRE:
                        if (a.kind == CommandKind::ACT && !found_opener && gap < tras(a.row))
                            flag(ai, bi, "tRAS ACT->PRE");
                        if (a.kind == CommandKind::WR && !found_opener &&
                            gap < tc[0].tcl + tc[0].twr)
                            flag(ai, bi, "tCL+tWR WR->PRE");
                        break;
                    case CommandKind::MIG:
                        if (a.kind == CommandKind::PRE && !found_pre && gap < trp(a.row))
                            flag(ai, bi, "tRP PRE->MIG");
                        if (a.kind == CommandKind::MIG && !found_opener && gap < tmig(a))
                            flag(ai, bi, "tMIG MIG->MIG");
                        break;
                }
            }

            if (a.kind == CommandKind::PRE && !found_pre) found_pre = true;
            if (is_opener && !found_opener) {
                found_opener = true;
                opener_is_act = a.kind == CommandKind::ACT;
                if (opener_is_act) {
                    nearest_act = ai;
                    nearest_act_row = a.row;
                    act_before_pre_or_mig = true;
                }
            }
            // constraints beyond the window are trivially satisfied; keep
            // scanning only until the phase context (nearest opener) is known
            if (!in_window && found_opener) break;
        }

        // phase legality, reconstructed from the trace alone
        switch (b.kind) {
            case CommandKind::RD:
            case CommandKind::WR:
                if (!act_before_pre_or_mig)
                    flag(bi, bi, "column command with no open row");
                else if (trace[nearest_act].cmd.subarray != b.subarray ||
                         nearest_act_row != b.row)
                    flag(nearest_act, bi, "column command to a row that is not open");
                break;
            case CommandKind::PRE:
                if (!act_before_pre_or_mig) flag(bi, bi, "PRE with no open row");
                break;
            case CommandKind::ACT:
                if (act_before_pre_or_mig) flag(nearest_act, bi, "ACT while a row is open");
                break;
            case CommandKind::MIG:
                if (act_before_pre_or_mig) flag(nearest_act, bi, "MIG while a row is open");
                if (geometry.tier_of_row(b.row) == geometry.tier_of_row(b.row2))
                    flag(bi, bi, "MIG within a single tier");
                break;
        }
    }
};

}  // namespace

std::vector<Violation> validate_command_trace(const std::vector<TimedCommand>& trace,
                                              const DeviceGeometry& geometry,
                                              const std::vector<TimingCycles>& per_tier) {
    std::vector<Violation> out;
    if (trace.empty()) return out;

    // stable time order (trace should already be sorted; sorting keeps the
    // oracle independent of emission order)
    std::vector<size_t> order(trace.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return trace[a].cycle < trace[b].cycle;
    });

    // shared channel: one command per cycle
    for (size_t k = 1; k < order.size(); ++k) {
        if (trace[order[k]].cycle == trace[order[k - 1]].cycle)
            out.push_back({order[k - 1], order[k], "channel: two commands in one cycle"});
    }

    uint64_t max_gap = 0;
    for (const auto& t : per_tier) {
        max_gap = std::max({max_gap, t.trc, t.tras, t.trp, t.trcd, t.tcl + t.twr, t.tccd, t.tmig});
    }

    std::vector<std::vector<size_t>> by_bank(geometry.banks);
    for (size_t k = 0; k < order.size(); ++k) {
        const Command& c = trace[order[k]].cmd;
        if (c.bank >= geometry.banks) {
            out.push_back({order[k], order[k], "bank index out of range"});
            continue;
        }
        by_bank[c.bank].push_back(order[k]);
    }

    Checker checker{trace, geometry, per_tier, out, max_gap};
    for (const auto& bank_cmds : by_bank)
        for (size_t q = 0; q < bank_cmds.size(); ++q) checker.check(bank_cmds, q);
    return out;
}

void dump_command_trace(std::ostream& out, const std::vector<TimedCommand>& trace) {
    for (const auto& t : trace) {
        out << t.cycle << ' ' << to_string(t.cmd.kind) << ' ' << t.cmd.bank << ' '
            << t.cmd.subarray << ' ' << t.cmd.row;
        if (t.cmd.kind == CommandKind::MIG) out << ' ' << t.cmd.row2;
        if (is_column(t.cmd.kind)) out << ' ' << t.cmd.column;
        out << '\n';
    }
}

std::vector<TimedCommand> parse_command_trace(std::istream& in) {
    std::vector<TimedCommand> trace;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        uint64_t cycle;
        std::string kind_str;
        Command c;
        if (!(ls >> cycle >> kind_str >> c.bank >> c.subarray >> c.row))
            throw WorkloadError("malformed command-trace line " + std::to_string(line_no));
        auto kind = command_kind_from_string(kind_str);
        if (!kind)
            throw WorkloadError("unknown command kind at line " + std::to_string(line_no));
        c.kind = *kind;
        if (c.kind == CommandKind::MIG && !(ls >> c.row2))
            throw WorkloadError("MIG missing destination row at line " + std::to_string(line_no));
        if (is_column(c.kind) && !(ls >> c.column))
            throw WorkloadError("column command missing column at line " + std::to_string(line_no));
        trace.push_back({cycle, c});
    }
    return trace;
}

}  // namespace tldram
