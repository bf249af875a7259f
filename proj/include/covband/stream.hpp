#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace covband {

// Deterministic source of uniform variates in the open interval (0, 1).
// Conversion from the engine output is explicit so streams are identical
// across standard library implementations.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed);
    UniformStream(std::uint64_t master_seed, std::uint64_t replication);

    double next() {
        ++consumed_;
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
    }

    std::uint64_t consumed() const { return consumed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t consumed_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Box-Muller, cosine branch: two uniforms per standard normal.
inline double standard_normal(double u1, double u2) {
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace covband
