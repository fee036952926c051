#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ctrp {

/// Seedable random stream owning all primitive draws used in the project.
///
/// Substreams are derived from a master seed and an index via splitmix64
/// (two mixing rounds), so building the k-th stream never requires drawing
/// the first k-1: streams are order-independent and safe to hand out to
/// concurrent workers.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Substream `index` of `master`. Documented splitting rule:
    /// seed = mix(mix(master) ^ (index + 1) * 0x9E3779B97F4A7C15).
    static RngStream substream(std::uint64_t master, std::uint64_t index) {
        return RngStream(mix(mix(master) ^ ((index + 1) * 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Marsaglia polar method (spare value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ctrp
