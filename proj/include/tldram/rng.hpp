#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tldram {

// splitmix64, used to derive per-subsystem seeds from the single run seed
// so that streams stay independent and reproducible.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
    uint64_t s = root ^ (0x6a09e667f3bcc909ULL * (stream + 1));
    return splitmix64(s);
}

// Deterministic RNG wrapper. mt19937_64 output is fully specified by the
// standard; the mappings below avoid the implementation-defined std
// distributions so traces are byte-identical everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, n)
    uint64_t below(uint64_t n) { return n == 0 ? 0 : gen_() % n; }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return next_double() < p; }

    // geometric with the given mean: P(k) = (1/(m+1)) (m/(m+1))^k, k >= 0
    uint64_t geometric(double mean) {
        if (mean <= 0.0) return 0;
        double u = next_double();
        if (u <= 0.0) return 0;
        double k = std::floor(std::log(u) / std::log(mean / (mean + 1.0)));
        if (k < 0.0) return 0;
        return static_cast<uint64_t>(k);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace tldram
