#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>

// Counter-based random numbers. Every draw is a pure function of a key, so
// any part of a run (dropout masks, shuffles, negative sampling, init) can be
// replayed independently of call order. That is what makes checkpoint resume
// and the two-pass dropout scheme exactly reproducible.
namespace galaxy::rng {

inline uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_key(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x8f1bbcdcbfa53e0bULL;
    for (uint64_t p : parts) h = splitmix(h ^ splitmix(p));
    return h;
}

/// Uniform in [0,1) from a 64-bit hash (53-bit mantissa construction).
inline double to_unit(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Stateful stream over a fixed key; draws are indexed by an internal counter.
class Stream {
public:
    explicit Stream(uint64_t key) : key_(key) {}
    Stream(std::initializer_list<uint64_t> parts) : key_(hash_key(parts)) {}

    uint64_t next_u64() { return splitmix(key_ ^ splitmix(counter_++)); }
    double next_unit() { return to_unit(next_u64()); }

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    double next_normal() {
        // Box-Muller; spare value cached.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.28318530717958647692 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Normal(0, std) resampled until |x| <= 2*std.
    double next_trunc_normal(double std_dev) {
        double x = next_normal() * std_dev;
        while (std::fabs(x) > 2.0 * std_dev) x = next_normal() * std_dev;
        return x;
    }

    uint64_t key() const { return key_; }
    uint64_t counter() const { return counter_; }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace galaxy::rng
