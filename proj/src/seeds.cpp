#include "jumpvol/seeds.hpp"

#include <limits>

#include "jumpvol/errors.hpp"

namespace jumpvol
{

Seed derive_seed(Seed base, std::uint64_t cell, std::uint64_t rep)
{
    constexpr std::uint64_t limit = std::numeric_limits<std::uint32_t>::max();
    if (cell > limit || rep > limit)
        throw ConfigError("derive_seed: cell and rep indices must fit in 32 bits");
    std::uint64_t const key = (cell << 32) | rep;
    return mix64(mix64(base) ^ mix64(key));
}

}  // namespace jumpvol
