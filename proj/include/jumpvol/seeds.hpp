#pragma once

#include <cstdint>

namespace jumpvol
{

using Seed = std::uint64_t;

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/*!
 * Seed for replication \c rep of grid cell \c cell under \c base.
 *
 * The pair (cell, rep) is packed into one word as cell << 32 | rep, mixed,
 * xored with the mixed base, and mixed again. Each step is a bijection, so
 * for a fixed base the map is injective over cell, rep < 2^32. Larger
 * indices throw ConfigError.
 */
Seed derive_seed(Seed base, std::uint64_t cell, std::uint64_t rep);

// Independent sub-stream of a seed, used to split one path seed between the
// jump and diffusion generators.
constexpr Seed substream(Seed seed, std::uint64_t stream) noexcept
{
    return mix64(mix64(seed) ^ mix64(~stream));
}

}  // namespace jumpvol
