#include "tldram/controller.hpp"

#include <algorithm>

#include "tldram/errors.hpp"
#include "tldram/rng.hpp"

namespace tldram {

double ControllerStats::mean_latency() const {
    return completed == 0 ? 0.0 : latency_sum / static_cast<double>(completed);
}

double ControllerStats::p95_latency() const {
    if (latency_samples.empty()) return 0.0;
    std::vector<uint32_t> sorted = latency_samples;
    size_t idx = static_cast<size_t>(0.95 * (sorted.size() - 1));
    std::nth_element(sorted.begin(), sorted.begin() + idx, sorted.end());
    return sorted[idx];
}

MemController::MemController(TimingEngine& engine, AddressMap map, ControllerParams params,
                             PolicyParams policy_params, const PageMapTable* page_map,
                             EnergyLedger* ledger, CalibrationAnchors anchors,
                             uint32_t core_count)
    : engine_(engine),
      map_(map),
      params_(params),
      policy_params_(policy_params),
      page_map_(page_map),
      ledger_(ledger),
      anchors_(anchors),
      banks_(engine.geometry().banks) {
    const DeviceGeometry& g = engine.geometry();
    if (policy_params_.kind != PolicyKind::NONE && g.tier_count() >= 2) {
        if (policy_params_.slot_count > g.near_rows())
            throw ConfigError("near_slots exceeds near-segment rows");
        if (page_map_ != nullptr)
            throw ConfigError("caching policy and page map are mutually exclusive");
        policies_.reserve(static_cast<size_t>(g.banks) * g.subarrays_per_bank);
        for (uint32_t i = 0; i < g.banks * g.subarrays_per_bank; ++i)
            policies_.emplace_back(policy_params_);
    }
    stats_.per_core_completed.assign(core_count, 0);
    stats_.per_core_latency_sum.assign(core_count, 0.0);
}

NearCachePolicy* MemController::policy_at(uint32_t bank, uint32_t subarray) {
    if (policies_.empty()) return nullptr;
    return &policies_[static_cast<size_t>(bank) * engine_.geometry().subarrays_per_bank +
                      subarray];
}

uint64_t MemController::write_token_for(uint64_t request_id) {
    uint64_t s = request_id ^ 0xc0ffee1234abcdefULL;
    return splitmix64(s);
}

bool MemController::enqueue(uint64_t address, bool is_write, uint32_t core, uint64_t now) {
    if (total_queued_ >= params_.queue_capacity) return false;
    auto d = map_.decode(address);
    auto req = std::make_unique<MemRequest>();
    req->id = next_id_++;
    req->core = core;
    req->address = address;
    req->is_write = is_write;
    req->arrival = now;
    req->bank = d.bank;
    req->subarray = d.subarray;
    req->logical_row = d.row;
    req->column = d.column;

    const DeviceGeometry& g = engine_.geometry();
    if (page_map_ != nullptr) {
        if (d.row < g.near_rows())
            throw WorkloadError("page-mapped run accessed near-segment row directly (address 0x" +
                                AddressMap::to_hex(address) + ")");
        uint64_t gid = global_row_id(g, d.bank, d.subarray, d.row);
        auto it = page_map_->indirection.find(gid);
        if (it != page_map_->indirection.end()) {
            uint32_t b, s, r;
            global_row_coords(g, it->second, b, s, r);
            req->bank = b;
            req->subarray = s;
            req->phys_row = r;
        } else {
            req->phys_row = d.row;
        }
        req->decided = true;
    } else if (!policies_.empty() && d.row < policy_params_.slot_count) {
        throw WorkloadError("trace targets a near-segment row reserved for caching (address 0x" +
                            AddressMap::to_hex(address) + ")");
    }

    banks_[req->bank].queue.push_back(std::move(req));
    ++total_queued_;
    return true;
}

uint32_t MemController::tentative_phys_row(const MemRequest& req) const {
    if (req.decided) return req.phys_row;
    if (!policies_.empty() && engine_.geometry().tier_of_row(req.logical_row) > 0) {
        const auto& pol = policies_[static_cast<size_t>(req.bank) *
                                        engine_.geometry().subarrays_per_bank +
                                    req.subarray];
        if (auto slot = pol.lookup(req.logical_row)) return pol.slot_row(*slot);
    }
    return req.logical_row;
}

void MemController::commit_decision(MemRequest& req, uint64_t now) {
    if (req.decided) return;
    req.decided = true;
    req.phys_row = req.logical_row;
    if (policies_.empty() || engine_.geometry().tier_of_row(req.logical_row) == 0) return;
    NearCachePolicy& pol = *policy_at(req.bank, req.subarray);
    AccessDecision d = pol.on_access(req.logical_row, now - req.arrival, now);
    switch (d.action) {
        case AccessDecision::Action::SERVE_NEAR:
            req.phys_row = pol.slot_row(d.slot);
            break;
        case AccessDecision::Action::SERVE_FAR:
            break;
        case AccessDecision::Action::SERVE_FAR_THEN_MIGRATE:
            req.wants_migration = true;
            req.victim_slot = d.slot;
            break;
    }
}

std::optional<Command> MemController::next_command_for(const MemRequest& req) const {
    const BankAux& aux = banks_[req.bank];
    const BankState& b = engine_.bank(req.bank);
    uint32_t phys = tentative_phys_row(req);
    if (b.has_open_row) {
        if (b.open_subarray == req.subarray && b.open_row == phys) {
            if (req.is_write)
                return Command::wr(req.bank, req.subarray, phys, req.column,
                                   write_token_for(req.id));
            return Command::rd(req.bank, req.subarray, phys, req.column);
        }
        if (aux.holders > 0) return std::nullopt;  // open row still needed by another request
        return Command::pre(req.bank);
    }
    return Command::act(req.bank, req.subarray, phys);
}

std::optional<Command> MemController::op_command_for(uint32_t bank) const {
    const BankAux& aux = banks_[bank];
    const MigrationOp& op = *aux.op;
    const BankState& b = engine_.bank(bank);
    if (b.has_open_row) {
        if (aux.holders > 0) return std::nullopt;
        return Command::pre(bank);
    }
    if (op.need_writeback)
        return Command::mig(bank, op.subarray, op.slot /* near row */, op.writeback_home);
    return Command::mig(bank, op.subarray, op.far_row, op.slot);
}

void MemController::charge(const Command& cmd) {
    if (ledger_ != nullptr) ledger_->charge(cmd, engine_.geometry(), anchors_);
}

void MemController::issue(const Command& cmd, MemRequest* req, uint64_t now) {
    BankAux& aux = banks_[cmd.bank];
    if (cmd.kind == CommandKind::ACT) {
        commit_decision(*req, now);
        engine_.apply(cmd, now);
        charge(cmd);
        req->row_opened_by_self = true;
        ++aux.holders;
        return;
    }
    if (cmd.kind == CommandKind::PRE) {
        engine_.apply(cmd, now);
        charge(cmd);
        return;
    }
    // column command: the request leaves the queue and waits for completion
    commit_decision(*req, now);
    ApplyResult r = engine_.apply(cmd, now);
    charge(cmd);
    if (!req->is_write) req->read_token = r.read_token;
    req->served_near = engine_.geometry().tier_count() > 1 &&
                       engine_.geometry().tier_of_row(req->phys_row) == 0;
    if (req->row_opened_by_self) {
        if (aux.holders == 0) throw InternalError("holder count underflow");
        --aux.holders;
    }
    if (req->is_write && !req->decided) throw InternalError("column issue before decision");
    if (req->is_write && req->served_near && !policies_.empty() &&
        engine_.geometry().tier_of_row(req->logical_row) > 0)
        policy_at(req->bank, req->subarray)->mark_dirty(req->logical_row);

    if (on_column_) on_column_(*req, now);

    if (req->wants_migration) {
        if (!aux.op) {
            NearCachePolicy& pol = *policy_at(req->bank, req->subarray);
            // the slot picked at decision time may have been refilled since;
            // with one op per bank and decisions blocked during ops this
            // cannot happen, but keep the check
            MigrationOp op;
            op.subarray = req->subarray;
            op.far_row = req->logical_row;
            op.slot = req->victim_slot;
            if (pol.state().slots[req->victim_slot].occupied) {
                EvictResult ev = pol.evict(req->victim_slot, now);
                op.need_writeback = ev.write_back;
                op.writeback_home = ev.far_home;
                if (ev.write_back) ++stats_.dirty_writebacks;
            }
            ++stats_.migrations_decided;
            aux.op = op;
        }
        // a second migration wish while an op is pending is dropped
    }

    // move ownership from the queue into the completion set
    auto& q = aux.queue;
    for (auto it = q.begin(); it != q.end(); ++it) {
        if (it->get() == req) {
            std::unique_ptr<MemRequest> owned = std::move(*it);
            q.erase(it);
            --total_queued_;
            completions_.emplace(r.completion, std::move(owned));
            return;
        }
    }
    throw InternalError("issued column command for a request not in its bank queue");
}

void MemController::issue_op_command(uint32_t bank, const Command& cmd, uint64_t now) {
    BankAux& aux = banks_[bank];
    engine_.apply(cmd, now);
    charge(cmd);
    if (cmd.kind == CommandKind::PRE) return;
    MigrationOp& op = *aux.op;
    ++stats_.mig_commands;
    if (op.need_writeback) {
        op.need_writeback = false;
        return;
    }
    policy_at(bank, op.subarray)->commit_fill(op.far_row, op.slot, now);
    aux.op.reset();
}

bool MemController::process_completions(uint64_t now) {
    bool any = false;
    while (!completions_.empty() && completions_.begin()->first <= now) {
        auto node = completions_.extract(completions_.begin());
        finalize(std::move(node.mapped()), node.key());
        any = true;
    }
    return any;
}

void MemController::finalize(std::unique_ptr<MemRequest> req, uint64_t cycle) {
    if (req->completion.has_value()) throw InternalError("request completed twice");
    req->completion = cycle;
    uint64_t latency = cycle - req->arrival;
    ++stats_.completed;
    stats_.latency_sum += static_cast<double>(latency);
    stats_.max_latency = std::max(stats_.max_latency, latency);
    stats_.latency_samples.push_back(static_cast<uint32_t>(latency));
    if (req->core < stats_.per_core_completed.size()) {
        ++stats_.per_core_completed[req->core];
        stats_.per_core_latency_sum[req->core] += static_cast<double>(latency);
    }
    if (req->served_near) ++stats_.near_served;
    if (!req->row_opened_by_self) ++stats_.row_hits;
    if (on_complete_) on_complete_(*req, cycle);
}

bool MemController::schedule(uint64_t now, uint64_t& next_ready) {
    std::vector<MemRequest*> reqs;
    for (auto& aux : banks_)
        for (auto& r : aux.queue) reqs.push_back(r.get());
    std::sort(reqs.begin(), reqs.end(),
              [](const MemRequest* a, const MemRequest* b) { return a->id < b->id; });

    auto consider = [&](const Command& cmd) -> bool {
        uint64_t e = engine_.earliest_issue(cmd, now);
        if (e == now) return true;
        next_ready = std::min(next_ready, e);
        return false;
    };

    // 1. starved requests preempt everything
    for (MemRequest* req : reqs) {
        if (now - req->arrival <= params_.aging_cap) continue;
        if (banks_[req->bank].op) continue;
        auto cmd = next_command_for(*req);
        if (cmd && consider(*cmd)) {
            issue(*cmd, req, now);
            return true;
        }
    }
    // 2. migration ops, once the open row has drained
    for (uint32_t b = 0; b < banks_.size(); ++b) {
        if (!banks_[b].op) continue;
        auto cmd = op_command_for(b);
        if (cmd && consider(*cmd)) {
            issue_op_command(b, *cmd, now);
            return true;
        }
    }
    // 3. row hits
    for (MemRequest* req : reqs) {
        if (banks_[req->bank].op) continue;
        const BankState& b = engine_.bank(req->bank);
        if (!b.has_open_row) continue;
        if (b.open_subarray != req->subarray || b.open_row != tentative_phys_row(*req)) continue;
        auto cmd = next_command_for(*req);
        if (cmd && (cmd->kind == CommandKind::RD || cmd->kind == CommandKind::WR) &&
            consider(*cmd)) {
            issue(*cmd, req, now);
            return true;
        }
    }
    // 4. oldest first
    for (MemRequest* req : reqs) {
        if (banks_[req->bank].op) continue;
        auto cmd = next_command_for(*req);
        if (cmd && consider(*cmd)) {
            issue(*cmd, req, now);
            return true;
        }
    }
    return false;
}

MemController::TickResult MemController::tick(uint64_t now) {
    TickResult r;
    r.completed_any = process_completions(now);
    r.next_ready = UINT64_MAX;
    r.issued = schedule(now, r.next_ready);
    if (!completions_.empty())
        r.next_ready = std::min(r.next_ready, completions_.begin()->first);
    return r;
}

bool MemController::idle() const {
    if (total_queued_ != 0 || !completions_.empty()) return false;
    for (const auto& aux : banks_)
        if (aux.op) return false;
    return true;
}

void MemController::decay_policies() {
    for (auto& p : policies_) p.decay();
}

}  // namespace tldram
