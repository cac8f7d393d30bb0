#include "tldram/workload.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "tldram/errors.hpp"
#include "tldram/rng.hpp"

namespace tldram {

std::vector<TraceRecord> parse_trace(std::istream& in) {
    std::vector<TraceRecord> trace;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        TraceRecord r;
        std::string rw, addr;
        long long bubble;
        if (!(ls >> bubble >> rw >> addr) || bubble < 0 || (rw != "R" && rw != "W"))
            throw WorkloadError("malformed trace line " + std::to_string(line_no) + ": " + line);
        r.bubble = static_cast<uint32_t>(bubble);
        r.is_write = rw == "W";
        try {
            size_t pos = 0;
            r.address = std::stoull(addr, &pos, 16);
            if (pos != addr.size()) throw std::invalid_argument(addr);
        } catch (const std::exception&) {
            throw WorkloadError("bad address at trace line " + std::to_string(line_no) + ": " + addr);
        }
        trace.push_back(r);
    }
    return trace;
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace) {
    for (const auto& r : trace) {
        out << r.bubble << (r.is_write ? " W 0x" : " R 0x") << std::hex << r.address << std::dec
            << '\n';
    }
}

AddressMap::Decoded workload_row_place(const DeviceGeometry& g, uint32_t row_offset,
                                       uint64_t wrow) {
    AddressMap::Decoded d;
    d.bank = static_cast<uint32_t>(wrow % g.banks);
    d.subarray = static_cast<uint32_t>((wrow / g.banks) % g.subarrays_per_bank);
    d.row = row_offset + static_cast<uint32_t>(wrow / (static_cast<uint64_t>(g.banks) *
                                                       g.subarrays_per_bank));
    return d;
}

namespace {

void check_gen(const DeviceGeometry& g, const GenBase& p) {
    if (p.row_count == 0) throw ConfigError("generator row_count must be >= 1");
    uint64_t per_sa = g.banks * static_cast<uint64_t>(g.subarrays_per_bank);
    uint64_t max_row = p.row_offset + (p.row_count + per_sa - 1) / per_sa;
    if (max_row > g.rows_per_subarray)
        throw ConfigError("generator row range exceeds subarray rows (needs rows up to " +
                          std::to_string(max_row) + ", have " +
                          std::to_string(g.rows_per_subarray) + ")");
    if (p.write_fraction < 0 || p.write_fraction > 1)
        throw ConfigError("write_fraction must be in [0,1]");
    if (p.bubble_mean < 0) throw ConfigError("bubble_mean must be >= 0");
}

TraceRecord make_record(const DeviceGeometry& g, const AddressMap& map, const GenBase& p,
                        Rng& rng, uint64_t wrow) {
    auto d = workload_row_place(g, p.row_offset, wrow);
    d.column = static_cast<uint32_t>(rng.below(g.columns_per_row));
    TraceRecord r;
    r.address = map.encode(d.bank, d.subarray, d.row, d.column);
    r.is_write = rng.chance(p.write_fraction);
    r.bubble = static_cast<uint32_t>(rng.geometric(p.bubble_mean));
    return r;
}

}  // namespace

std::vector<TraceRecord> gen_hotcold(const DeviceGeometry& geometry, const AddressMap& map,
                                     const HotColdParams& p) {
    check_gen(geometry, p);
    if (p.hot_access_fraction < 0 || p.hot_access_fraction > 1)
        throw ConfigError("hot_access_fraction must be in [0,1]");
    if (p.hot_row_count > p.row_count)
        throw ConfigError("hot_row_count exceeds row_count");
    Rng rng(p.seed);
    std::vector<TraceRecord> trace;
    trace.reserve(p.n);
    uint64_t cold = p.row_count - p.hot_row_count;
    for (uint64_t i = 0; i < p.n; ++i) {
        uint64_t wrow;
        if (p.hot_row_count > 0 && (cold == 0 || rng.chance(p.hot_access_fraction)))
            wrow = rng.below(p.hot_row_count);
        else
            wrow = p.hot_row_count + rng.below(cold);
        trace.push_back(make_record(geometry, map, p, rng, wrow));
    }
    return trace;
}

std::vector<TraceRecord> gen_zipf(const DeviceGeometry& geometry, const AddressMap& map,
                                  const ZipfParams& p) {
    check_gen(geometry, p);
    if (p.exponent < 0) throw ConfigError("zipf exponent must be >= 0");
    // cumulative popularity, rank r weight = r^-exponent
    std::vector<double> cdf(p.row_count);
    double acc = 0;
    for (uint32_t r = 0; r < p.row_count; ++r) {
        acc += std::pow(static_cast<double>(r + 1), -p.exponent);
        cdf[r] = acc;
    }
    for (auto& v : cdf) v /= acc;
    Rng rng(p.seed);
    std::vector<TraceRecord> trace;
    trace.reserve(p.n);
    for (uint64_t i = 0; i < p.n; ++i) {
        double u = rng.next_double();
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        uint64_t wrow = static_cast<uint64_t>(it - cdf.begin());
        if (wrow >= p.row_count) wrow = p.row_count - 1;
        trace.push_back(make_record(geometry, map, p, rng, wrow));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// CoreModel

CoreModel::CoreModel(uint32_t id, std::vector<TraceRecord> trace, uint32_t max_outstanding)
    : id_(id), trace_(std::move(trace)), max_outstanding_(max_outstanding) {
    if (max_outstanding_ < 1) throw ConfigError("max_outstanding must be >= 1");
}

void CoreModel::skip_empty_records() {
    while (cursor_ < trace_.size() && loaded_ && bubbles_left_ == 0 &&
           !trace_[cursor_].has_access) {
        ++cursor_;
        loaded_ = false;
        if (cursor_ < trace_.size()) {
            bubbles_left_ = trace_[cursor_].bubble;
            loaded_ = true;
        }
    }
}

CoreModel::Step CoreModel::tick(uint64_t now) {
    if (cursor_ >= trace_.size()) return Step::IDLE;
    if (!loaded_) {
        bubbles_left_ = trace_[cursor_].bubble;
        loaded_ = true;
        skip_empty_records();
        if (cursor_ >= trace_.size()) return Step::IDLE;
    }
    if (bubbles_left_ > 0) {
        --bubbles_left_;
        ++retired_;
        finish_cycle_ = now;
        skip_empty_records();
        return Step::RETIRED_BUBBLE;
    }
    if (!trace_[cursor_].has_access) {
        skip_empty_records();
        return Step::IDLE;
    }
    if (outstanding_ < max_outstanding_) return Step::WANT_ISSUE;
    return Step::IDLE;
}

void CoreModel::issue_accepted() {
    ++outstanding_;
    ++cursor_;
    loaded_ = false;
}

void CoreModel::complete(uint64_t now) {
    if (outstanding_ == 0) throw InternalError("core completion with nothing outstanding");
    --outstanding_;
    ++retired_;
    finish_cycle_ = std::max(finish_cycle_, now);
}

double CoreModel::ipc() const {
    if (retired_ == 0) return 0.0;
    return static_cast<double>(retired_) / static_cast<double>(finish_cycle_ + 1);
}

}  // namespace tldram
