#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ragmt {

/// splitmix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for segment `index` of a run seeded with `run_seed`.
constexpr std::uint64_t derive_segment_seed(std::uint64_t run_seed, std::uint64_t index) noexcept
{
    return splitmix64(run_seed ^ splitmix64(index));
}

/// Uniform integer in [0, bound) by rejection on raw engine output. Unlike
/// std::uniform_int_distribution the sequence is identical across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound)
{
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = 0;
    do {
        draw = engine();
    } while (draw >= limit);
    return draw % bound;
}

}  // namespace ragmt
