#include "tldram/policies.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tldram/errors.hpp"

namespace tldram {

const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::NONE: return "NONE";
        case PolicyKind::SIMPLE: return "SIMPLE";
        case PolicyKind::WAIT_MINIMIZED: return "WAIT_MINIMIZED";
        case PolicyKind::BENEFIT_BASED: return "BENEFIT_BASED";
    }
    return "?";
}

std::optional<PolicyKind> policy_kind_from_string(const std::string& s) {
    if (s == "NONE") return PolicyKind::NONE;
    if (s == "SIMPLE") return PolicyKind::SIMPLE;
    if (s == "WAIT_MINIMIZED") return PolicyKind::WAIT_MINIMIZED;
    if (s == "BENEFIT_BASED") return PolicyKind::BENEFIT_BASED;
    return std::nullopt;
}

void NearCacheState::check_consistent() const {
    size_t occupied = 0;
    for (uint32_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].occupied) continue;
        ++occupied;
        auto it = reverse.find(slots[i].far_row);
        if (it == reverse.end() || it->second != i)
            throw InternalError("reverse map does not point back to slot " + std::to_string(i));
    }
    if (occupied != reverse.size())
        throw InternalError("reverse map size " + std::to_string(reverse.size()) +
                            " != occupied slots " + std::to_string(occupied));
}

NearCachePolicy::NearCachePolicy(const PolicyParams& params) : params_(params) {
    state_.slots.resize(params.slot_count);
}

uint32_t NearCachePolicy::sat_inc(uint32_t v) const {
    return v >= params_.benefit_cap ? params_.benefit_cap : v + 1;
}

std::optional<uint32_t> NearCachePolicy::lookup(uint32_t far_row) const {
    auto it = state_.reverse.find(far_row);
    if (it == state_.reverse.end()) return std::nullopt;
    return it->second;
}

uint32_t NearCachePolicy::pick_lru_or_empty() const {
    uint32_t best = 0;
    uint64_t best_use = UINT64_MAX;
    for (uint32_t i = 0; i < state_.slots.size(); ++i) {
        const auto& s = state_.slots[i];
        if (!s.occupied) return i;
        if (s.last_use < best_use) {
            best_use = s.last_use;
            best = i;
        }
    }
    return best;
}

uint32_t NearCachePolicy::pick_min_benefit() const {
    uint32_t best = 0;
    uint32_t best_benefit = UINT32_MAX;
    for (uint32_t i = 0; i < state_.slots.size(); ++i) {
        const auto& s = state_.slots[i];
        uint32_t b = s.occupied ? s.benefit : 0;  // empty slots cost nothing to fill
        if (b < best_benefit) {
            best_benefit = b;
            best = i;
        }
    }
    return best;
}

uint32_t NearCachePolicy::shadow_benefit(uint32_t far_row) const {
    auto it = shadow_.find(far_row);
    return it == shadow_.end() ? 0 : it->second;
}

AccessDecision NearCachePolicy::on_access(uint32_t far_row, uint64_t queue_wait, uint64_t now) {
    if (auto slot = lookup(far_row)) {
        CacheSlot& s = state_.slots[*slot];
        s.last_use = now;
        if (params_.kind == PolicyKind::BENEFIT_BASED) s.benefit = sat_inc(s.benefit);
        return {AccessDecision::Action::SERVE_NEAR, *slot};
    }
    if (state_.slots.empty()) return {AccessDecision::Action::SERVE_FAR, 0};
    switch (params_.kind) {
        case PolicyKind::NONE:
            return {AccessDecision::Action::SERVE_FAR, 0};
        case PolicyKind::SIMPLE:
            return {AccessDecision::Action::SERVE_FAR_THEN_MIGRATE, pick_lru_or_empty()};
        case PolicyKind::WAIT_MINIMIZED:
            if (queue_wait > params_.wait_threshold)
                return {AccessDecision::Action::SERVE_FAR_THEN_MIGRATE, pick_lru_or_empty()};
            return {AccessDecision::Action::SERVE_FAR, 0};
        case PolicyKind::BENEFIT_BASED: {
            uint32_t b = sat_inc(shadow_benefit(far_row));
            shadow_[far_row] = b;
            uint32_t victim = pick_min_benefit();
            uint32_t victim_benefit =
                state_.slots[victim].occupied ? state_.slots[victim].benefit : 0;
            if (b > victim_benefit)
                return {AccessDecision::Action::SERVE_FAR_THEN_MIGRATE, victim};
            return {AccessDecision::Action::SERVE_FAR, 0};
        }
    }
    return {AccessDecision::Action::SERVE_FAR, 0};
}

EvictResult NearCachePolicy::evict(uint32_t slot, uint64_t now) {
    (void)now;
    if (slot >= state_.slots.size() || !state_.slots[slot].occupied)
        throw InternalError("evicting empty slot " + std::to_string(slot));
    CacheSlot& s = state_.slots[slot];
    EvictResult r;
    r.write_back = s.dirty;
    r.far_home = s.far_row;
    if (params_.kind == PolicyKind::BENEFIT_BASED && s.benefit > 0) shadow_[s.far_row] = s.benefit;
    state_.reverse.erase(s.far_row);
    s = CacheSlot{};
    state_.check_consistent();
    return r;
}

void NearCachePolicy::commit_fill(uint32_t far_row, uint32_t slot, uint64_t now) {
    if (slot >= state_.slots.size()) throw InternalError("fill into out-of-range slot");
    if (state_.slots[slot].occupied) throw InternalError("fill into occupied slot");
    if (state_.reverse.count(far_row)) throw InternalError("far row already cached");
    CacheSlot& s = state_.slots[slot];
    s.occupied = true;
    s.far_row = far_row;
    s.dirty = false;
    s.last_use = now;
    if (params_.kind == PolicyKind::BENEFIT_BASED) {
        s.benefit = shadow_benefit(far_row);
        shadow_.erase(far_row);
    }
    state_.reverse[far_row] = slot;
    state_.check_consistent();
}

void NearCachePolicy::mark_dirty(uint32_t far_row) {
    auto slot = lookup(far_row);
    if (!slot) throw InternalError("mark_dirty on uncached far row");
    state_.slots[*slot].dirty = true;
}

void NearCachePolicy::decay() {
    for (auto& s : state_.slots) s.benefit /= 2;
    for (auto it = shadow_.begin(); it != shadow_.end();) {
        it->second /= 2;
        if (it->second == 0)
            it = shadow_.erase(it);
        else
            ++it;
    }
}

// ---------------------------------------------------------------------------
// Profile-guided page mapping

uint64_t global_row_id(const DeviceGeometry& g, uint32_t bank, uint32_t subarray, uint32_t row) {
    return (static_cast<uint64_t>(row) * g.subarrays_per_bank + subarray) * g.banks + bank;
}

void global_row_coords(const DeviceGeometry& g, uint64_t gid, uint32_t& bank,
                       uint32_t& subarray, uint32_t& row) {
    bank = static_cast<uint32_t>(gid % g.banks);
    gid /= g.banks;
    subarray = static_cast<uint32_t>(gid % g.subarrays_per_bank);
    row = static_cast<uint32_t>(gid / g.subarrays_per_bank);
}

PageMapTable build_profile_map(const std::map<uint64_t, uint64_t>& profile, uint64_t k,
                               const DeviceGeometry& geometry) {
    uint64_t near_capacity = static_cast<uint64_t>(geometry.near_rows()) *
                             geometry.subarrays_per_bank * geometry.banks;
    if (k > near_capacity)
        throw ConfigError("profile map size " + std::to_string(k) +
                          " exceeds near-segment capacity " + std::to_string(near_capacity));
    std::vector<std::pair<uint64_t, uint64_t>> rows;  // (gid, count)
    for (const auto& [gid, count] : profile) {
        uint32_t b, s, r;
        global_row_coords(geometry, gid, b, s, r);
        if (r < geometry.near_rows())
            throw ConfigError("profile row " + std::to_string(gid) + " is a near-segment row");
        if (r >= geometry.rows_per_subarray)
            throw ConfigError("profile row " + std::to_string(gid) + " out of range");
        rows.emplace_back(gid, count);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    PageMapTable table;
    for (uint64_t i = 0; i < k && i < rows.size(); ++i) table.indirection[rows[i].first] = i;
    return table;
}

std::map<uint64_t, uint64_t> read_profile(std::istream& in) {
    std::map<uint64_t, uint64_t> profile;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        uint64_t row, count;
        if (!(ls >> row >> count))
            throw WorkloadError("malformed profile line " + std::to_string(line_no));
        profile[row] = count;
    }
    return profile;
}

void write_profile(std::ostream& out, const std::map<uint64_t, uint64_t>& profile) {
    for (const auto& [row, count] : profile) out << row << ' ' << count << '\n';
}

}  // namespace tldram
