#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "tldram/geometry.hpp"

namespace tldram {

enum class PolicyKind : uint8_t { NONE, SIMPLE, WAIT_MINIMIZED, BENEFIT_BASED };

const char* to_string(PolicyKind kind);
std::optional<PolicyKind> policy_kind_from_string(const std::string& s);

struct PolicyParams {
    PolicyKind kind = PolicyKind::NONE;
    uint32_t slot_count = 0;  // near rows reserved for caching, per subarray
    uint64_t wait_threshold = 8;
    uint64_t decay_epoch = 100000;
    uint32_t benefit_cap = 255;
};

struct CacheSlot {
    bool occupied = false;
    uint32_t far_row = 0;
    bool dirty = false;
    uint64_t last_use = 0;
    uint32_t benefit = 0;
};

struct NearCacheState {
    std::vector<CacheSlot> slots;
    std::unordered_map<uint32_t, uint32_t> reverse;  // far row -> slot

    void check_consistent() const;  // throws InternalError on mismatch
};

struct AccessDecision {
    enum class Action { SERVE_NEAR, SERVE_FAR, SERVE_FAR_THEN_MIGRATE };
    Action action = Action::SERVE_FAR;
    uint32_t slot = 0;  // SERVE_NEAR: hit slot; SERVE_FAR_THEN_MIGRATE: victim slot
};

struct EvictResult {
    bool write_back = false;  // dirty victim needs a MIG back to its far home
    uint32_t far_home = 0;
};

// Near-segment cache management for one subarray. Slot i occupies near row i.
// Copy-caching semantics: the far row keeps its data while cached; only a
// dirty near copy pays a write-back migration on eviction.
class NearCachePolicy {
public:
    explicit NearCachePolicy(const PolicyParams& params);

    // Decision for an access to a far-segment row. Hits update recency and
    // benefit; misses may pick a migration victim but mutate no slot state.
    AccessDecision on_access(uint32_t far_row, uint64_t queue_wait, uint64_t now);

    // slot holding far_row, if cached (no side effects)
    std::optional<uint32_t> lookup(uint32_t far_row) const;

    // Invalidate a slot; reports whether its contents must migrate back.
    EvictResult evict(uint32_t slot, uint64_t now);

    // Install far_row into an empty slot (after its fill migration issues).
    void commit_fill(uint32_t far_row, uint32_t slot, uint64_t now);

    void mark_dirty(uint32_t far_row);

    // halve every benefit counter (integer floor)
    void decay();

    const NearCacheState& state() const { return state_; }
    const PolicyParams& params() const { return params_; }
    uint32_t slot_row(uint32_t slot) const { return slot; }
    uint32_t shadow_benefit(uint32_t far_row) const;

private:
    uint32_t sat_inc(uint32_t v) const;
    uint32_t pick_lru_or_empty() const;
    uint32_t pick_min_benefit() const;

    PolicyParams params_;
    NearCacheState state_;
    // benefit counters for far rows not currently cached (benefit-based only)
    std::unordered_map<uint32_t, uint32_t> shadow_;
};

// Fixed indirection from hot far rows to near rows, built from an access
// profile. Rows are identified by a global row id:
//   gid = (row * subarrays_per_bank + subarray) * banks + bank
// so ids below near_rows * subarrays * banks are exactly the near rows.
struct PageMapTable {
    enum class Mode { ControllerIndirection, OsStaticProfile };
    Mode mode = Mode::ControllerIndirection;
    std::unordered_map<uint64_t, uint64_t> indirection;  // far gid -> near gid
};

uint64_t global_row_id(const DeviceGeometry& g, uint32_t bank, uint32_t subarray, uint32_t row);
void global_row_coords(const DeviceGeometry& g, uint64_t gid, uint32_t& bank,
                       uint32_t& subarray, uint32_t& row);

// Map the k most-accessed far rows (ties: lower row id) onto near rows 0..k-1.
PageMapTable build_profile_map(const std::map<uint64_t, uint64_t>& profile, uint64_t k,
                               const DeviceGeometry& geometry);

// Profile file: one `row_index count` line per row, ascending by row index.
std::map<uint64_t, uint64_t> read_profile(std::istream& in);
void write_profile(std::ostream& out, const std::map<uint64_t, uint64_t>& profile);

}  // namespace tldram
