#pragma once

#include <cstdint>
#include <random>

namespace rym {

/// Deterministic generator. std::uniform_real_distribution is implementation
/// defined, so the conversion from bits to doubles is done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace rym
