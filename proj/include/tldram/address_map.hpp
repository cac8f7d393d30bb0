#pragma once

#include <cstdint>
#include <string>

#include "tldram/errors.hpp"
#include "tldram/geometry.hpp"

namespace tldram {

// Contiguous bit-field address layout, low to high:
// byte-in-column, column, bank, subarray, row. All dimensions must be
// powers of two so the mapping is a bijection.
struct AddressMap {
    uint32_t byte_bits = 0;
    uint32_t column_bits = 0;
    uint32_t bank_bits = 0;
    uint32_t subarray_bits = 0;
    uint32_t row_bits = 0;

    struct Decoded {
        uint32_t bank = 0;
        uint32_t subarray = 0;
        uint32_t row = 0;
        uint32_t column = 0;
    };

    static uint32_t log2_exact(uint64_t v, const char* what) {
        if (v == 0 || (v & (v - 1)) != 0)
            throw ConfigError(std::string(what) + " must be a power of two, got " +
                              std::to_string(v));
        uint32_t bits = 0;
        while ((1ULL << bits) < v) ++bits;
        return bits;
    }

    static AddressMap for_geometry(const DeviceGeometry& g) {
        AddressMap m;
        m.byte_bits = log2_exact(g.bytes_per_column, "bytes_per_column");
        m.column_bits = log2_exact(g.columns_per_row, "columns_per_row");
        m.bank_bits = log2_exact(g.banks, "banks");
        m.subarray_bits = log2_exact(g.subarrays_per_bank, "subarrays_per_bank");
        m.row_bits = log2_exact(g.rows_per_subarray, "rows_per_subarray");
        return m;
    }

    uint32_t total_bits() const {
        return byte_bits + column_bits + bank_bits + subarray_bits + row_bits;
    }
    uint64_t capacity_bytes() const { return 1ULL << total_bits(); }

    Decoded decode(uint64_t address) const {
        if (address >= capacity_bytes())
            throw WorkloadError("address 0x" + to_hex(address) + " beyond capacity of " +
                                std::to_string(capacity_bytes()) + " bytes");
        Decoded d;
        uint64_t a = address >> byte_bits;
        d.column = static_cast<uint32_t>(a & ((1ULL << column_bits) - 1));
        a >>= column_bits;
        d.bank = static_cast<uint32_t>(a & ((1ULL << bank_bits) - 1));
        a >>= bank_bits;
        d.subarray = static_cast<uint32_t>(a & ((1ULL << subarray_bits) - 1));
        a >>= subarray_bits;
        d.row = static_cast<uint32_t>(a);
        return d;
    }

    uint64_t encode(uint32_t bank, uint32_t subarray, uint32_t row, uint32_t column) const {
        uint64_t a = row;
        a = (a << subarray_bits) | subarray;
        a = (a << bank_bits) | bank;
        a = (a << column_bits) | column;
        return a << byte_bits;
    }

    static std::string to_hex(uint64_t v) {
        static const char* digits = "0123456789abcdef";
        if (v == 0) return "0";
        std::string s;
        while (v) {
            s.insert(s.begin(), digits[v & 0xf]);
            v >>= 4;
        }
        return s;
    }
};

}  // namespace tldram
