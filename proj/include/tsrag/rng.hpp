#ifndef TSRAG_RNG_HPP
#define TSRAG_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace tsrag {

// Deterministic RNG used everywhere seeds matter. std::mt19937_64 is fully
// specified by the standard; the uniform/gaussian transforms are hand-rolled
// because the std distribution objects are implementation-defined and would
// break byte-identical artifacts across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Integer in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift bounded draw; bias is negligible for our n << 2^64.
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n)) % n;
    }

    // Box-Muller, one value per call (the spare is cached).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 1e-300) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Stable mix for deriving per-step / per-item sub-seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

} // namespace tsrag

#endif
