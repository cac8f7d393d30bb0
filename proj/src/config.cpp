#include "tldram/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "tldram/errors.hpp"

namespace tldram {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* trace_kind_name(TraceKind k) {
    switch (k) {
        case TraceKind::HOTCOLD: return "hotcold";
        case TraceKind::ZIPF: return "zipf";
        case TraceKind::FILE: return "file";
    }
    return "?";
}

}  // namespace

DeviceGeometry RunConfig::geometry() const {
    std::vector<uint32_t> tiers{near_cells};
    if (far_cells > 0) tiers.push_back(far_cells);
    return DeviceGeometry::make(tiers, subarrays_per_bank, banks, columns_per_row,
                                bytes_per_column);
}

void RunConfig::validate() const {
    DeviceGeometry g = geometry();
    AddressMap::for_geometry(g);  // power-of-two checks
    decomposition.validate();
    if (cycle_ns <= 0) throw ConfigError("timing.cycle_ns must be positive");
    if (policy.kind != PolicyKind::NONE) {
        if (far_cells == 0)
            throw ConfigError("caching policy requires a two-tier geometry");
        if (policy.slot_count == 0)
            throw ConfigError("caching policy requires policy.near_slots >= 1");
        if (policy.slot_count > near_cells)
            throw ConfigError("policy.near_slots exceeds near-segment rows");
    }
    if (!profile_file.empty() && policy.kind != PolicyKind::NONE)
        throw ConfigError("profile-guided mapping and a caching policy are mutually exclusive");
    if (policy.decay_epoch == 0) throw ConfigError("policy.decay_epoch must be >= 1");
    if (controller.queue_capacity == 0) throw ConfigError("controller.queue_capacity must be >= 1");
    if (core_count == 0 || core_count > 64) throw ConfigError("cores.count must be in [1,64]");
    if (max_outstanding == 0 || max_outstanding > 8)
        throw ConfigError("cores.max_outstanding must be in [1,8]");
    if (trace_kind != TraceKind::FILE) {
        if (trace_hot_fraction < 0 || trace_hot_fraction > 1)
            throw ConfigError("trace.hot_fraction must be in [0,1]");
        if (trace_write_fraction < 0 || trace_write_fraction > 1)
            throw ConfigError("trace.write_fraction must be in [0,1]");
        if (trace_zipf_exponent < 0) throw ConfigError("trace.zipf_exponent must be >= 0");
    } else if (trace_file.empty()) {
        throw ConfigError("trace.kind = file requires trace.file");
    }
    if (rdwr_energy_cost < 0) throw ConfigError("energy.rdwr_cost must be >= 0");
}

std::string RunConfig::serialize() const {
    std::map<std::string, std::string> kv;
    kv["geometry.near_cells"] = std::to_string(near_cells);
    kv["geometry.far_cells"] = std::to_string(far_cells);
    kv["geometry.banks"] = std::to_string(banks);
    kv["geometry.subarrays_per_bank"] = std::to_string(subarrays_per_bank);
    kv["geometry.columns_per_row"] = std::to_string(columns_per_row);
    kv["geometry.bytes_per_column"] = std::to_string(bytes_per_column);
    kv["timing.cycle_ns"] = fmt_double(cycle_ns);
    kv["timing.tras_frac"] = fmt_double(decomposition.tras_frac);
    kv["timing.trp_frac"] = fmt_double(decomposition.trp_frac);
    kv["timing.trcd_frac"] = fmt_double(decomposition.trcd_frac);
    kv["timing.tcl_ns"] = fmt_double(decomposition.tcl_ns);
    kv["timing.twr_ns"] = fmt_double(decomposition.twr_ns);
    kv["timing.tccd_ns"] = fmt_double(decomposition.tccd_ns);
    kv["policy.kind"] = to_string(policy.kind);
    kv["policy.near_slots"] = std::to_string(policy.slot_count);
    kv["policy.wait_threshold"] = std::to_string(policy.wait_threshold);
    kv["policy.decay_epoch"] = std::to_string(policy.decay_epoch);
    kv["policy.benefit_cap"] = std::to_string(policy.benefit_cap);
    kv["mapping.profile_file"] = profile_file;
    kv["mapping.size"] = std::to_string(profile_map_size);
    kv["controller.aging_cap"] = std::to_string(controller.aging_cap);
    kv["controller.queue_capacity"] = std::to_string(controller.queue_capacity);
    kv["energy.rdwr_cost"] = fmt_double(rdwr_energy_cost);
    kv["cores.count"] = std::to_string(core_count);
    kv["cores.max_outstanding"] = std::to_string(max_outstanding);
    kv["trace.kind"] = trace_kind_name(trace_kind);
    kv["trace.file"] = trace_file;
    kv["trace.n"] = std::to_string(trace_n);
    kv["trace.row_count"] = std::to_string(trace_row_count);
    kv["trace.row_offset"] = std::to_string(trace_row_offset);
    kv["trace.hot_rows"] = std::to_string(trace_hot_rows);
    kv["trace.hot_fraction"] = fmt_double(trace_hot_fraction);
    kv["trace.write_fraction"] = fmt_double(trace_write_fraction);
    kv["trace.bubble_mean"] = fmt_double(trace_bubble_mean);
    kv["trace.zipf_exponent"] = fmt_double(trace_zipf_exponent);
    kv["seed"] = std::to_string(seed);
    std::ostringstream out;
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
    return out.str();
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig cfg;
    std::string line;
    size_t line_no = 0;

    auto parse_u64 = [&](const std::string& v) -> uint64_t {
        try {
            size_t pos = 0;
            uint64_t r = std::stoull(v, &pos, 0);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(line_no) + ": bad integer '" + v + "'");
        }
    };
    auto parse_f = [&](const std::string& v) -> double {
        try {
            size_t pos = 0;
            double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return r;
        } catch (const std::exception&) {
            throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + v + "'");
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));

        if (key == "geometry.near_cells") cfg.near_cells = static_cast<uint32_t>(parse_u64(val));
        else if (key == "geometry.far_cells") cfg.far_cells = static_cast<uint32_t>(parse_u64(val));
        else if (key == "geometry.banks") cfg.banks = static_cast<uint32_t>(parse_u64(val));
        else if (key == "geometry.subarrays_per_bank")
            cfg.subarrays_per_bank = static_cast<uint32_t>(parse_u64(val));
        else if (key == "geometry.columns_per_row")
            cfg.columns_per_row = static_cast<uint32_t>(parse_u64(val));
        else if (key == "geometry.bytes_per_column")
            cfg.bytes_per_column = static_cast<uint32_t>(parse_u64(val));
        else if (key == "timing.cycle_ns") cfg.cycle_ns = parse_f(val);
        else if (key == "timing.tras_frac") cfg.decomposition.tras_frac = parse_f(val);
        else if (key == "timing.trp_frac") cfg.decomposition.trp_frac = parse_f(val);
        else if (key == "timing.trcd_frac") cfg.decomposition.trcd_frac = parse_f(val);
        else if (key == "timing.tcl_ns") cfg.decomposition.tcl_ns = parse_f(val);
        else if (key == "timing.twr_ns") cfg.decomposition.twr_ns = parse_f(val);
        else if (key == "timing.tccd_ns") cfg.decomposition.tccd_ns = parse_f(val);
        else if (key == "policy.kind") {
            auto k = policy_kind_from_string(val);
            if (!k) throw ConfigError("line " + std::to_string(line_no) +
                                      ": unknown policy kind '" + val + "'");
            cfg.policy.kind = *k;
        } else if (key == "policy.near_slots")
            cfg.policy.slot_count = static_cast<uint32_t>(parse_u64(val));
        else if (key == "policy.wait_threshold") cfg.policy.wait_threshold = parse_u64(val);
        else if (key == "policy.decay_epoch") cfg.policy.decay_epoch = parse_u64(val);
        else if (key == "policy.benefit_cap")
            cfg.policy.benefit_cap = static_cast<uint32_t>(parse_u64(val));
        else if (key == "mapping.profile_file") cfg.profile_file = val;
        else if (key == "mapping.size") cfg.profile_map_size = parse_u64(val);
        else if (key == "controller.aging_cap") cfg.controller.aging_cap = parse_u64(val);
        else if (key == "controller.queue_capacity")
            cfg.controller.queue_capacity = static_cast<uint32_t>(parse_u64(val));
        else if (key == "energy.rdwr_cost") cfg.rdwr_energy_cost = parse_f(val);
        else if (key == "cores.count") cfg.core_count = static_cast<uint32_t>(parse_u64(val));
        else if (key == "cores.max_outstanding")
            cfg.max_outstanding = static_cast<uint32_t>(parse_u64(val));
        else if (key == "trace.kind") {
            if (val == "hotcold") cfg.trace_kind = TraceKind::HOTCOLD;
            else if (val == "zipf") cfg.trace_kind = TraceKind::ZIPF;
            else if (val == "file") cfg.trace_kind = TraceKind::FILE;
            else throw ConfigError("line " + std::to_string(line_no) +
                                   ": unknown trace kind '" + val + "'");
        } else if (key == "trace.file") cfg.trace_file = val;
        else if (key == "trace.n") cfg.trace_n = parse_u64(val);
        else if (key == "trace.row_count")
            cfg.trace_row_count = static_cast<uint32_t>(parse_u64(val));
        else if (key == "trace.row_offset")
            cfg.trace_row_offset = static_cast<uint32_t>(parse_u64(val));
        else if (key == "trace.hot_rows")
            cfg.trace_hot_rows = static_cast<uint32_t>(parse_u64(val));
        else if (key == "trace.hot_fraction") cfg.trace_hot_fraction = parse_f(val);
        else if (key == "trace.write_fraction") cfg.trace_write_fraction = parse_f(val);
        else if (key == "trace.bubble_mean") cfg.trace_bubble_mean = parse_f(val);
        else if (key == "trace.zipf_exponent") cfg.trace_zipf_exponent = parse_f(val);
        else if (key == "seed") cfg.seed = parse_u64(val);
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
}

bool RunConfig::same_trace_source(const RunConfig& other) const {
    if (seed != other.seed || trace_kind != other.trace_kind || core_count != other.core_count)
        return false;
    if (trace_kind == TraceKind::FILE) return trace_file == other.trace_file;
    return trace_n == other.trace_n && trace_row_count == other.trace_row_count &&
           trace_row_offset == other.trace_row_offset &&
           trace_hot_rows == other.trace_hot_rows &&
           trace_hot_fraction == other.trace_hot_fraction &&
           trace_write_fraction == other.trace_write_fraction &&
           trace_bubble_mean == other.trace_bubble_mean &&
           trace_zipf_exponent == other.trace_zipf_exponent;
}

}  // namespace tldram
