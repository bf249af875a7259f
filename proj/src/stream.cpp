#include "covband/stream.hpp"

namespace covband {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

UniformStream::UniformStream(std::uint64_t seed) : engine_(seeded_engine(splitmix64(seed), 0)) {}

UniformStream::UniformStream(std::uint64_t master_seed, std::uint64_t replication)
    : engine_(seeded_engine(splitmix64(master_seed), splitmix64(replication ^ 0xA5A5A5A5ULL))) {}

} // namespace covband
