#pragma once

#include <array>
#include <cstdint>

namespace resave {

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64. The output
/// stream depends only on the seed, never on the platform or standard
/// library, so replications are reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream `index` derived from a master seed: the pair is
    /// hashed with SplitMix64 before seeding.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index);

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal, Marsaglia polar method. Pairs are produced together;
    /// the second value is cached for the next call.
    double normal() noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace resave
