#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace danes {

// Bad or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite losses, shape mismatches and other numeric failures (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG. std::mt19937_64 is fully specified by the standard, but the
// std:: distributions are not, so all draws go through our own mappings to keep
// results bit-identical across compilers.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    uint64_t uniform_index(uint64_t n) {
        // rejection sampling to avoid modulo bias
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // derive an independent stream, e.g. one per ablation run
    Rng fork(uint64_t salt) {
        return Rng(engine_() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    std::mt19937_64 engine_;
};

// FNV-1a, used for input hashes in run manifests and FastText n-gram bucketing.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 14695981039346656037ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

} // namespace danes
